#include "uosf/spectral.hpp"

#include "uosf/error.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>

namespace uosf {

namespace {

// FFTW planning is not thread-safe; execution with new-array calls is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_finite_all(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

void TimeSeries::validate() const {
  if (samples.empty()) throw ArgumentError("time series is empty");
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw ArgumentError("sample rate must be positive");
  }
  if (!is_finite_all(samples)) throw DataError("time series contains non-finite samples");
}

std::string to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::hann:
      return "hann";
    case WindowKind::rectangular:
      return "rectangular";
  }
  return "unknown";
}

WindowKind window_kind_from_string(const std::string& name) {
  if (name == "hann" || name == "hanning") return WindowKind::hann;
  if (name == "rectangular" || name == "rect" || name == "boxcar") return WindowKind::rectangular;
  throw ArgumentError("unknown window kind: " + name);
}

TaperWindow TaperWindow::make(WindowKind kind, std::size_t length) {
  if (length < 2) throw ArgumentError("window length must be at least 2");
  TaperWindow w;
  w.kind = kind;
  w.coefficients.resize(length);
  const double denom = static_cast<double>(length - 1);
  for (std::size_t l = 0; l < length; ++l) {
    w.coefficients[l] =
        kind == WindowKind::hann
            ? 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(l) / denom))
            : 1.0;
  }
  return w;
}

double TaperWindow::energy() const {
  return std::inner_product(coefficients.begin(), coefficients.end(), coefficients.begin(), 0.0);
}

void SpectralConfig::validate() const {
  if (segment_length < 2) throw ArgumentError("segment length L must be at least 2");
  if (segment_hop == 0) throw ArgumentError("segment hop D must be positive");
  if (segment_hop > segment_length) throw ArgumentError("segment hop D must not exceed L");
  for (double f : frequency_bins) {
    if (!(f >= 0.0 && f <= 0.5)) {
      throw ArgumentError("frequency bins must lie in [0, 0.5] (cycles per sample)");
    }
  }
}

std::vector<double> SpectralConfig::resolved_bins() const {
  if (!frequency_bins.empty()) return frequency_bins;
  std::vector<double> grid(segment_length / 2 + 1);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid[k] = static_cast<double>(k) / static_cast<double>(segment_length);
  }
  return grid;
}

std::size_t SpectralConfig::bin_count() const {
  return frequency_bins.empty() ? segment_length / 2 + 1 : frequency_bins.size();
}

std::size_t frame_count(std::size_t n_samples, const SpectralConfig& config) {
  if (n_samples < config.segment_length) return 0;
  return (n_samples - config.segment_length) / config.segment_hop + 1;
}

struct PeriodogramEngine::FftState {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  explicit FftState(std::size_t n) {
    std::lock_guard lock(fftw_planner_mutex());
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  ~FftState() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
  FftState(const FftState&) = delete;
  FftState& operator=(const FftState&) = delete;
};

PeriodogramEngine::PeriodogramEngine(const SpectralConfig& config)
    : config_(config),
      window_(TaperWindow::make(config.window, config.segment_length)),
      bins_(config.resolved_bins()) {
  config_.validate();
  const std::size_t L = config_.segment_length;
  scale_ = 1.0 / (config_.compensate_window_energy ? window_.energy() : static_cast<double>(L));

  use_fft_ = config_.evaluation == Evaluation::fft ||
             (config_.evaluation == Evaluation::automatic && config_.frequency_bins.empty());

  if (use_fft_) {
    grid_index_.resize(bins_.size());
    for (std::size_t b = 0; b < bins_.size(); ++b) {
      const double k = bins_[b] * static_cast<double>(L);
      const double kr = std::round(k);
      if (std::abs(k - kr) > 1e-9) {
        throw ArgumentError("fft evaluation requires bins on the grid k/L");
      }
      grid_index_[b] = static_cast<std::size_t>(kr);
    }
    fft_ = std::make_unique<FftState>(L);
  } else {
    cos_table_.resize(bins_.size() * L);
    sin_table_.resize(bins_.size() * L);
    for (std::size_t b = 0; b < bins_.size(); ++b) {
      for (std::size_t l = 0; l < L; ++l) {
        // Reduce the phase to [0, 1) cycles before scaling to keep large l
        // from eating precision.
        const double cycles = std::fmod(bins_[b] * static_cast<double>(l), 1.0);
        const double phase = 2.0 * std::numbers::pi * cycles;
        cos_table_[b * L + l] = std::cos(phase);
        sin_table_[b * L + l] = std::sin(phase);
      }
    }
  }
}

PeriodogramEngine::~PeriodogramEngine() = default;
PeriodogramEngine::PeriodogramEngine(PeriodogramEngine&&) noexcept = default;
PeriodogramEngine& PeriodogramEngine::operator=(PeriodogramEngine&&) noexcept = default;

void PeriodogramEngine::compute(std::span<const double> segment, std::span<double> out) {
  const std::size_t L = config_.segment_length;
  if (segment.size() != L) throw ArgumentError("segment length does not match L");
  if (out.size() != bins_.size()) throw ArgumentError("output size does not match bin count");
  const auto& w = window_.coefficients;

  if (use_fft_) {
    for (std::size_t l = 0; l < L; ++l) fft_->in[l] = w[l] * segment[l];
    fftw_execute_dft_r2c(fft_->plan, fft_->in, fft_->out);
    for (std::size_t b = 0; b < bins_.size(); ++b) {
      const auto& z = fft_->out[grid_index_[b]];
      out[b] = scale_ * (z[0] * z[0] + z[1] * z[1]);
    }
    return;
  }

  for (std::size_t b = 0; b < bins_.size(); ++b) {
    const double* c = &cos_table_[b * L];
    const double* s = &sin_table_[b * L];
    double re = 0.0;
    double im = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const double v = w[l] * segment[l];
      re += v * c[l];
      im -= v * s[l];
    }
    out[b] = scale_ * (re * re + im * im);
  }
}

PeriodogramFrame compute_periodogram(const TimeSeries& series, const SpectralConfig& config,
                                     std::size_t frame_index) {
  config.validate();
  const std::size_t start = frame_index * config.segment_hop;
  if (frame_index >= frame_count(series.samples.size(), config)) {
    throw BoundsError("frame " + std::to_string(frame_index) + " does not fit in the series");
  }
  std::span<const double> segment(series.samples.data() + start, config.segment_length);
  if (!is_finite_all(segment)) throw DataError("segment contains non-finite samples");

  PeriodogramEngine engine(config);
  PeriodogramFrame frame;
  frame.index = frame_index;
  frame.power.resize(engine.bins().size());
  engine.compute(segment, frame.power);
  return frame;
}

std::vector<PeriodogramFrame> stream_periodograms(const TimeSeries& series,
                                                  const SpectralConfig& config) {
  config.validate();
  const std::size_t n_frames = frame_count(series.samples.size(), config);
  if (n_frames == 0) {
    throw DataError("series of " + std::to_string(series.samples.size()) +
                    " samples is shorter than one segment");
  }
  series.validate();

  PeriodogramEngine engine(config);
  std::vector<PeriodogramFrame> frames(n_frames);
  for (std::size_t n = 0; n < n_frames; ++n) {
    frames[n].index = n;
    frames[n].power.resize(engine.bins().size());
    engine.compute({series.samples.data() + n * config.segment_hop, config.segment_length},
                   frames[n].power);
  }
  return frames;
}

std::vector<double> wosa_estimate(std::span<const PeriodogramFrame> frames) {
  if (frames.empty()) throw ArgumentError("wosa window is empty");
  const std::size_t bins = frames.front().power.size();
  std::vector<double> mean(bins, 0.0);
  for (const auto& f : frames) {
    if (f.power.size() != bins) throw ArgumentError("frames have different bin counts");
    for (std::size_t b = 0; b < bins; ++b) mean[b] += f.power[b];
  }
  const auto count = static_cast<double>(frames.size());
  for (double& m : mean) m /= count;
  return mean;
}

}  // namespace uosf
