#include "uosf/spectrogram.hpp"

#include "uosf/error.hpp"
#include "uosf/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>

namespace uosf {

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::raw:
      return "raw";
    case Estimator::wosa:
      return "wosa";
    case Estimator::usawp:
      return "usawp";
    case Estimator::utlosf:
      return "utlosf";
  }
  return "unknown";
}

Estimator estimator_from_string(const std::string& name) {
  if (name == "raw") return Estimator::raw;
  if (name == "wosa") return Estimator::wosa;
  if (name == "usawp") return Estimator::usawp;
  if (name == "utlosf") return Estimator::utlosf;
  throw ArgumentError("unknown estimator: " + name);
}

std::vector<Estimator> parse_estimators(const std::string& list) {
  std::vector<Estimator> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    const Estimator est = estimator_from_string(item.substr(b, e - b + 1));
    if (std::find(out.begin(), out.end(), est) != out.end()) {
      throw ArgumentError("estimator listed twice: " + to_string(est));
    }
    out.push_back(est);
  }
  if (out.empty()) throw ArgumentError("no estimators selected");
  return out;
}

std::string join_estimators(const std::vector<Estimator>& list) {
  std::string out;
  for (Estimator e : list) {
    if (!out.empty()) out += ',';
    out += to_string(e);
  }
  return out;
}

void PipelineConfig::validate() const {
  spectral.validate();
  if (R < 1) throw ArgumentError("R must be at least 1");
  if (Q < 1 || Q > R) throw ArgumentError("Q must lie in [1, R]");
  if (estimators.empty()) throw ArgumentError("no estimators selected");
  std::set<Estimator> seen(estimators.begin(), estimators.end());
  if (seen.size() != estimators.size()) throw ArgumentError("estimator listed twice");
  if (!(sample_scale > 0.0) || !std::isfinite(sample_scale)) {
    throw ArgumentError("sample scale must be positive and finite");
  }
  universal(OsfKind::sawp).validate();
}

bool PipelineConfig::wants(Estimator e) const {
  return std::find(estimators.begin(), estimators.end(), e) != estimators.end();
}

UniversalConfig PipelineConfig::universal(OsfKind kind) const {
  UniversalConfig u;
  u.R = R;
  u.kind = kind;
  u.c = c;
  u.tau = tau;
  u.ranks = ranks;
  return u;
}

namespace {

// Sliding window of the last R values of one bin, kept both in arrival
// order and sorted.
struct BinState {
  std::vector<double> ring;
  std::vector<double> sorted;
  std::size_t head = 0;
  std::optional<UniversalFilter> usawp;
  std::optional<UniversalFilter> utlosf;
  // Shared-blend mode only: private pools for evaluating member outputs.
  std::optional<CompetitorPool> sawp_pool;
  std::optional<CompetitorPool> tlosf_pool;

  void push(double v, std::size_t R) {
    if (sorted.size() == R) {
      const double old = ring[head];
      sorted.erase(std::lower_bound(sorted.begin(), sorted.end(), old));
    }
    sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), v), v);
    ring[head] = v;
    head = (head + 1) % R;
  }

  double mean() const {
    double acc = 0.0;
    for (double v : sorted) acc += v;
    return acc / static_cast<double>(sorted.size());
  }
};

struct Output {
  Estimator estimator;
  std::vector<double> power;  // rows x bins
};

}  // namespace

struct SpectrogramStream::Impl {
  PipelineConfig config;
  double sample_rate_hz;
  PeriodogramEngine engine;
  std::size_t n_bins;
  std::size_t R;
  std::size_t Q;

  std::vector<double> pending;  // samples from the next frame start onwards
  std::size_t frames = 0;       // periodograms processed
  std::vector<BinState> bins;
  std::optional<UniversalFilter> shared_usawp;
  std::optional<UniversalFilter> shared_utlosf;
  std::vector<Output> outputs;

  Impl(const PipelineConfig& cfg, double rate)
      : config(cfg),
        sample_rate_hz(rate),
        engine(cfg.spectral),
        n_bins(engine.bins().size()),
        R(static_cast<std::size_t>(cfg.R)),
        Q(static_cast<std::size_t>(cfg.Q)) {
    bins.resize(n_bins);
    const bool usawp = config.wants(Estimator::usawp);
    const bool utlosf = config.wants(Estimator::utlosf);
    for (auto& b : bins) {
      b.ring.assign(R, 0.0);
      b.sorted.reserve(R);
      if (config.shared_blend) {
        if (usawp) b.sawp_pool = CompetitorPool::from_config(config.universal(OsfKind::sawp));
        if (utlosf) b.tlosf_pool = CompetitorPool::from_config(config.universal(OsfKind::tlosf));
      } else {
        if (usawp) b.usawp.emplace(config.universal(OsfKind::sawp));
        if (utlosf) b.utlosf.emplace(config.universal(OsfKind::tlosf));
      }
    }
    if (config.shared_blend) {
      if (usawp) shared_usawp.emplace(config.universal(OsfKind::sawp));
      if (utlosf) shared_utlosf.emplace(config.universal(OsfKind::tlosf));
    }
    for (Estimator e : config.estimators) outputs.push_back({e, {}});
  }

  bool raw_row(std::size_t n) const { return n % Q == 0; }
  bool window_row(std::size_t n) const { return n + 1 >= R && (n + 1 - R) % Q == 0; }
  std::size_t raw_rows(std::size_t n_frames) const { return n_frames == 0 ? 0 : (n_frames - 1) / Q + 1; }
  std::size_t window_rows(std::size_t n_frames) const {
    return n_frames < R ? 0 : (n_frames - R) / Q + 1;
  }

  void push(std::span<const double> samples) {
    const double scale = config.sample_scale;
    for (double v : samples) {
      if (!std::isfinite(v)) throw DataError("input contains non-finite samples");
    }
    pending.reserve(pending.size() + samples.size());
    for (double v : samples) pending.push_back(v * scale);

    const std::size_t L = config.spectral.segment_length;
    const std::size_t D = config.spectral.segment_hop;
    if (pending.size() < L) return;
    const std::size_t m = (pending.size() - L) / D + 1;

    std::vector<double> batch(m * n_bins);
    for (std::size_t i = 0; i < m; ++i) {
      engine.compute({pending.data() + i * D, L}, {batch.data() + i * n_bins, n_bins});
    }
    pending.erase(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(m * D));

    const std::size_t first = frames;
    frames += m;
    for (auto& out : outputs) {
      const std::size_t rows = out.estimator == Estimator::raw ? raw_rows(frames) : window_rows(frames);
      out.power.resize(rows * n_bins, 0.0);
    }

    if (config.shared_blend) {
      process_shared(batch, first, m);
    } else {
      parallel_ranges(n_bins, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) process_bin(b, batch, first, m);
      });
    }
  }

  Output* output_for(Estimator e) {
    for (auto& o : outputs) {
      if (o.estimator == e) return &o;
    }
    return nullptr;
  }

  void process_bin(std::size_t b, const std::vector<double>& batch, std::size_t first, std::size_t m) {
    BinState& st = bins[b];
    Output* raw = output_for(Estimator::raw);
    Output* wosa = output_for(Estimator::wosa);
    Output* usawp = output_for(Estimator::usawp);
    Output* utlosf = output_for(Estimator::utlosf);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t n = first + i;
      const double p = batch[i * n_bins + b];
      st.push(p, R);
      if (raw && raw_row(n)) raw->power[(n / Q) * n_bins + b] = p;
      if (!window_row(n)) continue;
      const std::size_t row = (n + 1 - R) / Q;
      if (wosa) wosa->power[row * n_bins + b] = st.mean();
      if (usawp) usawp->power[row * n_bins + b] = st.usawp->step_sorted(st.sorted);
      if (utlosf) utlosf->power[row * n_bins + b] = st.utlosf->step_sorted(st.sorted);
    }
  }

  // Frame-major: the blend of each time step depends on every bin.
  void process_shared(const std::vector<double>& batch, std::size_t first, std::size_t m) {
    Output* raw = output_for(Estimator::raw);
    Output* wosa = output_for(Estimator::wosa);
    Output* usawp = output_for(Estimator::usawp);
    Output* utlosf = output_for(Estimator::utlosf);

    std::vector<double> sawp_y;
    std::vector<double> tlosf_y;
    const std::size_t P_sawp = shared_usawp ? shared_usawp->pool().size() : 0;
    const std::size_t P_tlosf = shared_utlosf ? shared_utlosf->pool().size() : 0;
    sawp_y.resize(n_bins * P_sawp);
    tlosf_y.resize(n_bins * P_tlosf);

    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t n = first + i;
      const bool emit = window_row(n);
      const std::size_t row = emit ? (n + 1 - R) / Q : 0;
      parallel_ranges(n_bins, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) {
          BinState& st = bins[b];
          const double p = batch[i * n_bins + b];
          st.push(p, R);
          if (raw && raw_row(n)) raw->power[(n / Q) * n_bins + b] = p;
          if (!emit) continue;
          if (wosa) wosa->power[row * n_bins + b] = st.mean();
          if (st.sawp_pool) {
            std::span<double> y(sawp_y.data() + b * P_sawp, P_sawp);
            st.sawp_pool->evaluate(st.sorted, y);
            usawp->power[row * n_bins + b] = shared_usawp->blend(y);
          }
          if (st.tlosf_pool) {
            std::span<double> y(tlosf_y.data() + b * P_tlosf, P_tlosf);
            st.tlosf_pool->evaluate(st.sorted, y);
            utlosf->power[row * n_bins + b] = shared_utlosf->blend(y);
          }
        }
      });
      if (!emit) continue;
      if (shared_usawp) observe_shared(*shared_usawp, sawp_y, P_sawp, usawp->power, row);
      if (shared_utlosf) observe_shared(*shared_utlosf, tlosf_y, P_tlosf, utlosf->power, row);
    }
  }

  // Sums squared member and universal outputs over bins in bin order.
  void observe_shared(UniversalFilter& filter, const std::vector<double>& y, std::size_t P,
                      const std::vector<double>& out, std::size_t row) {
    std::vector<double> sq(P, 0.0);
    double u = 0.0;
    double u2 = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) {
      for (std::size_t k = 0; k < P; ++k) {
        const double v = y[b * P + k];
        sq[k] += v * v;
      }
      const double e = out[row * n_bins + b];
      u += e;
      u2 += e * e;
    }
    filter.observe(sq, u, u2);
  }

  SpectrogramSet result() const {
    if (frames < R) {
      throw DataError("input yields " + std::to_string(frames) + " periodograms, fewer than R = " +
                      std::to_string(R));
    }
    const double L = static_cast<double>(config.spectral.segment_length);
    const double D = static_cast<double>(config.spectral.segment_hop);
    std::vector<double> freqs(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) freqs[b] = engine.bins()[b] * sample_rate_hz;

    SpectrogramSet set;
    for (const auto& out : outputs) {
      Spectrogram s;
      s.estimator = out.estimator;
      s.freqs_hz = freqs;
      s.power = out.power;
      const std::size_t rows = out.power.size() / n_bins;
      s.times_s.resize(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        // Raw row r is frame rQ; a window row spans frames rQ .. rQ+R-1.
        const double first_frame = static_cast<double>(r * Q);
        const double span_frames = out.estimator == Estimator::raw ? 0.0 : static_cast<double>(R - 1);
        s.times_s[r] = (first_frame * D + 0.5 * (span_frames * D + L)) / sample_rate_hz;
      }
      set.emplace(out.estimator, std::move(s));
    }
    return set;
  }
};

SpectrogramStream::SpectrogramStream(const PipelineConfig& config, double sample_rate_hz) {
  config.validate();
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw ArgumentError("sample rate must be positive");
  }
  impl_ = std::make_unique<Impl>(config, sample_rate_hz);
}

SpectrogramStream::~SpectrogramStream() = default;
SpectrogramStream::SpectrogramStream(SpectrogramStream&&) noexcept = default;
SpectrogramStream& SpectrogramStream::operator=(SpectrogramStream&&) noexcept = default;

void SpectrogramStream::push(std::span<const double> samples) { impl_->push(samples); }

std::size_t SpectrogramStream::periodograms() const { return impl_->frames; }

SpectrogramSet SpectrogramStream::result() const { return impl_->result(); }

SpectrogramSet run_spectrogram(const TimeSeries& series, const PipelineConfig& config) {
  series.validate();
  config.validate();
  const std::size_t available = frame_count(series.samples.size(), config.spectral);
  if (available < static_cast<std::size_t>(config.R)) {
    throw DataError("input yields " + std::to_string(available) + " periodograms, fewer than R = " +
                    std::to_string(config.R));
  }
  SpectrogramStream stream(config, series.sample_rate_hz);
  stream.push(series.samples);
  return stream.result();
}

}  // namespace uosf
