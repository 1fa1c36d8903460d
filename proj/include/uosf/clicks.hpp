#pragma once

#include "uosf/rng.hpp"
#include "uosf/spectral.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace uosf {

// Synthetic broadband clicks: bursts of Gaussian white noise added on top of
// a recording. durations holds one length per onset, or a single length
// shared by all onsets.
struct ClickSpec {
  std::vector<double> onsets_s;
  std::vector<std::size_t> durations;  // samples
  double level_db = 30.0;              // burst power over background power
  // Background power per sample. Unset: mean square of the input series.
  std::optional<double> background_power;

  std::size_t duration(std::size_t i) const;
  // Throws ArgumentError on mismatched lengths, zero durations or a
  // non-finite level, and BoundsError when an onset falls outside the series.
  void validate(std::size_t n_samples, double sample_rate_hz) const;
};

// Adds a burst with variance background * 10^(level_db/10) at each onset.
// Bursts that run past the end of the series are truncated. An empty spec
// returns the series unchanged.
TimeSeries inject_clicks(const TimeSeries& series, const ClickSpec& spec, Rng& rng);

// Periodograms (segment length L, hop D) that overlap a run of `duration`
// samples starting at an arbitrary offset, in the worst case.
std::size_t affected_periodograms(std::size_t duration, const SpectralConfig& config);

// True when every click touches fewer than R periodograms, so each PSD
// window of R periodograms contains click-free frames.
bool clicks_fit_window(const ClickSpec& spec, const SpectralConfig& config, int R);

struct RandomClickOptions {
  std::size_t count = 20;
  double level_db = 30.0;
  double min_duration_s = 0.02;
  double max_duration_s = 0.08;
  double margin_s = 0.5;   // kept click-free at both ends of the series
  double min_gap_s = 0.0;  // minimum spacing between the end of one click and the next onset
};

// Onsets drawn uniformly over the series (sorted, non-overlapping when
// min_gap_s allows it) with uniformly drawn durations.
ClickSpec random_clicks(std::size_t n_samples, double sample_rate_hz,
                        const RandomClickOptions& options, Rng& rng);

// Gaussian white noise with the given per-sample standard deviation.
TimeSeries white_noise(std::size_t n_samples, double sample_rate_hz, double sigma, Rng& rng);

double mean_power(const TimeSeries& series);

}  // namespace uosf
