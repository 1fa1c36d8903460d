#pragma once

#include "uosf/spectral.hpp"
#include "uosf/universal.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace uosf {

enum class Estimator { raw, wosa, usawp, utlosf };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& name);
// Comma-separated list, e.g. "raw,wosa,utlosf". Rejects duplicates.
std::vector<Estimator> parse_estimators(const std::string& list);
std::string join_estimators(const std::vector<Estimator>& list);

struct PipelineConfig {
  SpectralConfig spectral;  // defaults: L = 512, hann, D = 128
  int R = 100;              // periodograms per PSD estimate
  int Q = 1;                // hop between PSD estimates, in periodograms
  double c = 1e5;
  int tau = 500;
  std::vector<int> ranks;  // competing ranks for the universal filters; empty = all
  std::vector<Estimator> estimators{Estimator::raw, Estimator::wosa, Estimator::usawp,
                                    Estimator::utlosf};
  // One blend per time step for all bins (losses summed across bins)
  // instead of one per bin.
  bool shared_blend = false;
  // Multiplies input samples before the transform. WAV input is normalized
  // to [-1, 1]; the default restores 16-bit count units, the scale at which
  // the default c is meaningful.
  double sample_scale = 32768.0;

  void validate() const;
  bool wants(Estimator e) const;
  UniversalConfig universal(OsfKind kind) const;
};

// Rows are time steps, columns frequency bins.
struct Spectrogram {
  Estimator estimator = Estimator::raw;
  std::vector<double> times_s;  // centre of the data each row covers
  std::vector<double> freqs_hz;
  std::vector<double> power;    // rows x cols, row-major

  std::size_t rows() const { return times_s.size(); }
  std::size_t cols() const { return freqs_hz.size(); }
  double at(std::size_t row, std::size_t col) const { return power[row * cols() + col]; }
};

using SpectrogramSet = std::map<Estimator, Spectrogram>;

// Incremental spectrogram estimation. Feed samples in chunks of any size;
// the result does not depend on how the input was split.
//
// Every bin keeps the last R periodogram values and, for each universal
// estimator, its own filter state. Raw rows are emitted at every Q-th
// periodogram (n = 0, Q, 2Q, ...). WOSA and universal rows start once R
// periodograms have arrived (n = R-1) and follow every Q periodograms after
// that; partial windows produce no output.
class SpectrogramStream {
 public:
  SpectrogramStream(const PipelineConfig& config, double sample_rate_hz);
  ~SpectrogramStream();
  SpectrogramStream(SpectrogramStream&&) noexcept;
  SpectrogramStream& operator=(SpectrogramStream&&) noexcept;

  // Throws DataError on non-finite samples.
  void push(std::span<const double> samples);

  std::size_t periodograms() const;

  // Assembles the spectrograms. Throws DataError when fewer than R
  // periodograms were seen. The stream stays usable afterwards.
  SpectrogramSet result() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SpectrogramSet run_spectrogram(const TimeSeries& series, const PipelineConfig& config);

}  // namespace uosf
