#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace uosf {

// Real-valued signal with its sampling rate. Samples are expected in
// normalized full-scale units, but nothing here depends on that.
struct TimeSeries {
  std::vector<double> samples;
  double sample_rate_hz = 1.0;

  // Throws ArgumentError on empty samples or a non-positive rate and
  // DataError on non-finite samples.
  void validate() const;
};

enum class WindowKind { hann, rectangular };

std::string to_string(WindowKind kind);
WindowKind window_kind_from_string(const std::string& name);

// Taper applied to each segment before the transform.
struct TaperWindow {
  WindowKind kind = WindowKind::hann;
  std::vector<double> coefficients;

  // hann: w[l] = 0.5 * (1 - cos(2*pi*l / (L-1))), l = 0..L-1 (symmetric,
  // zero at both ends). rectangular: all ones. Requires L >= 2.
  static TaperWindow make(WindowKind kind, std::size_t length);

  double energy() const;  // sum of w[l]^2
};

// How the per-bin power is evaluated.
//   automatic: fft over the full grid when no bins are configured, direct
//              summation otherwise.
//   direct:    explicit sum over the segment for every configured bin.
//   fft:       real FFT over the grid k/L; configured bins must lie on it.
enum class Evaluation { automatic, direct, fft };

struct SpectralConfig {
  std::size_t segment_length = 512;  // L
  std::size_t segment_hop = 128;     // D
  WindowKind window = WindowKind::hann;
  // Normalized frequencies (cycles per sample) in [0, 0.5]. Empty selects the
  // full half-spectrum grid k/L, k = 0..L/2.
  std::vector<double> frequency_bins;
  // Divide by sum(w^2) instead of L. Off by default so the estimate is the
  // plain (1/L)|sum w x e|^2 periodogram.
  bool compensate_window_energy = false;
  Evaluation evaluation = Evaluation::automatic;

  void validate() const;
  std::vector<double> resolved_bins() const;
  std::size_t bin_count() const;
};

struct PeriodogramFrame {
  std::size_t index = 0;  // n
  std::vector<double> power;
};

// Number of whole segments in a series of n samples: floor((n - L)/D) + 1,
// or 0 when n < L.
std::size_t frame_count(std::size_t n_samples, const SpectralConfig& config);

// Reusable periodogram evaluator for one configuration. Holds the window,
// twiddle tables or an FFT plan, and scratch buffers, so an instance must not
// be shared between threads while computing.
class PeriodogramEngine {
 public:
  explicit PeriodogramEngine(const SpectralConfig& config);
  ~PeriodogramEngine();
  PeriodogramEngine(PeriodogramEngine&&) noexcept;
  PeriodogramEngine& operator=(PeriodogramEngine&&) noexcept;
  PeriodogramEngine(const PeriodogramEngine&) = delete;
  PeriodogramEngine& operator=(const PeriodogramEngine&) = delete;

  const SpectralConfig& config() const { return config_; }
  const std::vector<double>& bins() const { return bins_; }
  bool uses_fft() const { return use_fft_; }

  // segment.size() must equal L and out.size() the bin count.
  void compute(std::span<const double> segment, std::span<double> out);

 private:
  struct FftState;

  SpectralConfig config_;
  TaperWindow window_;
  std::vector<double> bins_;
  double scale_ = 0.0;
  bool use_fft_ = false;
  std::vector<double> cos_table_;  // bins x L
  std::vector<double> sin_table_;
  std::vector<std::size_t> grid_index_;  // fft path: bin -> k
  std::unique_ptr<FftState> fft_;
};

PeriodogramFrame compute_periodogram(const TimeSeries& series, const SpectralConfig& config,
                                     std::size_t frame_index);

// All frames n = 0..N-1. Throws DataError if the series is shorter than one
// segment.
std::vector<PeriodogramFrame> stream_periodograms(const TimeSeries& series,
                                                  const SpectralConfig& config);

// Per-bin arithmetic mean of the given frames (Welch overlapped segment
// averaging over one window of R periodograms).
std::vector<double> wosa_estimate(std::span<const PeriodogramFrame> frames);

}  // namespace uosf
