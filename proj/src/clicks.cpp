#include "uosf/clicks.hpp"

#include "uosf/error.hpp"

#include <algorithm>
#include <cmath>

namespace uosf {

std::size_t ClickSpec::duration(std::size_t i) const {
  return durations.size() == 1 ? durations.front() : durations.at(i);
}

void ClickSpec::validate(std::size_t n_samples, double sample_rate_hz) const {
  if (onsets_s.empty()) return;
  if (durations.size() != 1 && durations.size() != onsets_s.size()) {
    throw ArgumentError("click durations must have one entry or one per onset");
  }
  for (std::size_t d : durations) {
    if (d == 0) throw ArgumentError("click duration must be positive");
  }
  if (!std::isfinite(level_db)) throw ArgumentError("click level must be finite");
  if (background_power && !(*background_power >= 0.0 && std::isfinite(*background_power))) {
    throw ArgumentError("background power must be finite and non-negative");
  }
  const double end_s = static_cast<double>(n_samples) / sample_rate_hz;
  for (double t : onsets_s) {
    if (!(t >= 0.0 && t < end_s)) {
      throw BoundsError("click onset " + std::to_string(t) + " s outside the series [0, " +
                        std::to_string(end_s) + ") s");
    }
  }
}

TimeSeries inject_clicks(const TimeSeries& series, const ClickSpec& spec, Rng& rng) {
  series.validate();
  spec.validate(series.samples.size(), series.sample_rate_hz);
  TimeSeries out = series;
  if (spec.onsets_s.empty()) return out;

  const double background = spec.background_power.value_or(mean_power(series));
  const double sigma = std::sqrt(background * std::pow(10.0, spec.level_db / 10.0));
  const std::size_t n = out.samples.size();
  for (std::size_t i = 0; i < spec.onsets_s.size(); ++i) {
    const auto start = static_cast<std::size_t>(std::floor(spec.onsets_s[i] * series.sample_rate_hz));
    const std::size_t stop = std::min(n, start + spec.duration(i));
    for (std::size_t s = start; s < stop; ++s) out.samples[s] += sigma * rng.normal();
  }
  return out;
}

std::size_t affected_periodograms(std::size_t duration, const SpectralConfig& config) {
  if (duration == 0) return 0;
  // Frame starts are multiples of D; a frame [nD, nD+L) meets the run
  // [s, s+d) when nD lies in [s-L+1, s+d-1], which holds at most
  // floor((d+L-2)/D) + 1 multiples of D.
  const std::size_t span = duration + config.segment_length - 2;
  return span / config.segment_hop + 1;
}

bool clicks_fit_window(const ClickSpec& spec, const SpectralConfig& config, int R) {
  for (std::size_t i = 0; i < spec.onsets_s.size(); ++i) {
    if (affected_periodograms(spec.duration(i), config) >= static_cast<std::size_t>(R)) return false;
  }
  return true;
}

ClickSpec random_clicks(std::size_t n_samples, double sample_rate_hz,
                        const RandomClickOptions& options, Rng& rng) {
  if (!(sample_rate_hz > 0.0)) throw ArgumentError("sample rate must be positive");
  if (!(options.min_duration_s > 0.0) || options.max_duration_s < options.min_duration_s) {
    throw ArgumentError("click durations need 0 < min <= max");
  }
  const double length_s = static_cast<double>(n_samples) / sample_rate_hz;
  const double usable = length_s - 2.0 * options.margin_s - options.max_duration_s;
  if (options.count > 0 && !(usable > 0.0)) throw ArgumentError("series too short for the clicks");

  ClickSpec spec;
  spec.level_db = options.level_db;
  if (options.count == 0) return spec;

  // Stratify: one onset per equal slot, so clicks are spread out and the
  // gap constraint is easy to meet.
  const double slot = usable / static_cast<double>(options.count);
  const double room = slot - options.max_duration_s - options.min_gap_s;
  if (room < 0.0) throw ArgumentError("too many clicks for the series length and gap");
  for (std::size_t i = 0; i < options.count; ++i) {
    const double onset = options.margin_s + slot * static_cast<double>(i) + rng.uniform() * room;
    const double dur_s =
        options.min_duration_s + rng.uniform() * (options.max_duration_s - options.min_duration_s);
    spec.onsets_s.push_back(onset);
    spec.durations.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(dur_s * sample_rate_hz))));
  }
  return spec;
}

TimeSeries white_noise(std::size_t n_samples, double sample_rate_hz, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw ArgumentError("noise level must be non-negative");
  TimeSeries s;
  s.sample_rate_hz = sample_rate_hz;
  s.samples.resize(n_samples);
  for (double& v : s.samples) v = sigma * rng.normal();
  return s;
}

double mean_power(const TimeSeries& series) {
  if (series.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double v : series.samples) acc += v * v;
  return acc / static_cast<double>(series.samples.size());
}

}  // namespace uosf
