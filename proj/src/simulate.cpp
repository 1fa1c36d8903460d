#include "uosf/simulate.hpp"

#include "uosf/error.hpp"
#include "uosf/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace uosf {

namespace {

// Trials per reduction block. Fixed so the summation order of the blend
// traces does not depend on the worker count.
constexpr std::size_t kTrialsPerBlock = 25;

std::size_t estimator_index(OsfKind kind, int rank, int R) {
  const std::size_t base = kind == OsfKind::sawp ? 0 : static_cast<std::size_t>(R) + 1;
  return base + (rank == 0 ? static_cast<std::size_t>(R) : static_cast<std::size_t>(rank - 1));
}

// Weights below the smallest normal double are clamped so the log stays
// finite.
double safe_log(double mu) { return std::log(std::max(mu, std::numeric_limits<double>::min())); }

// Maps the pool's blending weights onto rank columns (zero for ranks outside
// the pool).
void scatter_mu(const UniversalFilter& filter, std::span<double> row) {
  std::fill(row.begin(), row.end(), 0.0);
  const auto mu = filter.mu();
  const auto& members = filter.pool().members();
  for (std::size_t k = 0; k < members.size(); ++k) {
    row[static_cast<std::size_t>(members[k].threshold_rank - 1)] += mu[k];
  }
}

}  // namespace

double RhoSchedule::at(std::size_t t) const {
  return initial + increment * static_cast<double>(period == 0 ? 0 : t / period);
}

void MixtureConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ArgumentError("lambda must be positive");
  if (!(K > 1.0) || !std::isfinite(K)) throw ArgumentError("K must exceed 1");
  if (R < 1) throw ArgumentError("R must be at least 1");
  if (T == 0) throw ArgumentError("T must be positive");
  if (rho.period == 0) throw ArgumentError("rho period must be positive");
  // The schedule is monotone, so checking both ends covers every t < T.
  for (double r : {rho.at(0), rho.at(T - 1)}) {
    if (!(r >= 0.0 && r < 1.0)) throw ArgumentError("rho must stay in [0, 1) for t < T");
  }
}

void sample_mixture_window(const MixtureConfig& config, std::size_t t, Rng& rng,
                           std::span<double> out) {
  const double rho = config.rho.at(t);
  const double outlier_mean = config.K * config.lambda;
  for (double& v : out) {
    const bool outlier = rng.uniform() < rho;
    v = rng.exponential(outlier ? outlier_mean : config.lambda);
  }
}

std::vector<double> sample_mixture_window(const MixtureConfig& config, std::size_t t, Rng& rng) {
  std::vector<double> out(static_cast<std::size_t>(config.R));
  sample_mixture_window(config, t, rng, out);
  return out;
}

double TrialOutputs::fixed(OsfKind kind, std::size_t t, int rank) const {
  const auto& m = kind == OsfKind::sawp ? sawp : tlosf;
  return m[t * static_cast<std::size_t>(R) + static_cast<std::size_t>(rank - 1)];
}

double TrialOutputs::universal(OsfKind kind, std::size_t t) const {
  return kind == OsfKind::sawp ? usawp[t] : utlosf[t];
}

TrialOutputs run_trial(const MixtureConfig& mix, const UniversalConfig& univ, std::uint64_t trial) {
  mix.validate();
  univ.validate();
  if (univ.R != mix.R) throw ArgumentError("mixture R and universal R differ");

  const std::size_t T = mix.T;
  const auto R = static_cast<std::size_t>(mix.R);

  UniversalConfig sawp_cfg = univ;
  sawp_cfg.kind = OsfKind::sawp;
  UniversalConfig tlosf_cfg = univ;
  tlosf_cfg.kind = OsfKind::tlosf;
  UniversalFilter usawp(sawp_cfg);
  UniversalFilter utlosf(tlosf_cfg);
  const FixedRankBank sawp_bank(OsfKind::sawp, mix.R);
  const FixedRankBank tlosf_bank(OsfKind::tlosf, mix.R);

  TrialOutputs out;
  out.T = T;
  out.R = mix.R;
  out.sawp.resize(T * R);
  out.tlosf.resize(T * R);
  out.usawp.resize(T);
  out.utlosf.resize(T);
  out.wosa.resize(T);
  out.mu_sawp.resize(T * R);
  out.mu_tlosf.resize(T * R);

  Rng rng(mix.seed, trial);
  std::vector<double> window(R);
  for (std::size_t t = 0; t < T; ++t) {
    sample_mixture_window(mix, t, rng, window);
    std::sort(window.begin(), window.end());

    sawp_bank.evaluate(window, {out.sawp.data() + t * R, R});
    tlosf_bank.evaluate(window, {out.tlosf.data() + t * R, R});

    double sum = 0.0;
    for (double v : window) sum += v;
    out.wosa[t] = sum / static_cast<double>(R);

    scatter_mu(usawp, {out.mu_sawp.data() + t * R, R});
    scatter_mu(utlosf, {out.mu_tlosf.data() + t * R, R});
    out.usawp[t] = usawp.step_sorted(window);
    out.utlosf[t] = utlosf.step_sorted(window);
  }
  return out;
}

const EstimatorMetrics& CheckpointMetrics::fixed(OsfKind kind, int rank) const {
  if (rank < 1 || rank > R()) throw ArgumentError("rank out of range");
  return estimators[estimator_index(kind, rank, R())];
}

const EstimatorMetrics& CheckpointMetrics::universal(OsfKind kind) const {
  return estimators[estimator_index(kind, 0, R())];
}

const EstimatorMetrics& CheckpointMetrics::best_fixed(OsfKind kind) const {
  const EstimatorMetrics* best = &fixed(kind, 1);
  for (int r = 2; r <= R(); ++r) {
    const auto& e = fixed(kind, r);
    if (e.mse < best->mse) best = &e;
  }
  return *best;
}

namespace {

int span_argmax(const std::vector<double>& m, std::size_t T, int R, std::size_t begin, std::size_t end) {
  if (begin >= end || end > T) throw ArgumentError("empty or out-of-range iteration span");
  const auto n = static_cast<std::size_t>(R);
  std::vector<double> total(n, 0.0);
  for (std::size_t t = begin; t < end; ++t) {
    for (std::size_t r = 0; r < n; ++r) total[r] += m[t * n + r];
  }
  return static_cast<int>(std::max_element(total.begin(), total.end()) - total.begin()) + 1;
}

}  // namespace

int BlendTrace::argmax_rank(std::size_t begin, std::size_t end) const {
  return span_argmax(mean_log_mu, T, R, begin, end);
}

int BlendTrace::argmax_rank_arithmetic(std::size_t begin, std::size_t end) const {
  return span_argmax(mean_mu, T, R, begin, end);
}

std::vector<std::size_t> default_checkpoints(const MixtureConfig& mix) {
  std::vector<std::size_t> cps;
  for (std::size_t t = mix.rho.period - 1; t < mix.T; t += mix.rho.period) cps.push_back(t);
  if (cps.empty() || cps.back() != mix.T - 1) cps.push_back(mix.T - 1);
  return cps;
}

StudyResult run_study(const MixtureConfig& mix, const UniversalConfig& univ, std::size_t n_trials,
                      std::vector<std::size_t> checkpoints) {
  mix.validate();
  univ.validate();
  if (univ.R != mix.R) throw ArgumentError("mixture R and universal R differ");
  if (n_trials < 2) throw ArgumentError("monte carlo needs at least two trials");
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  if (checkpoints.empty()) throw ArgumentError("no checkpoints");
  if (checkpoints.back() >= mix.T) throw ArgumentError("checkpoint beyond the last iteration");

  const std::size_t T = mix.T;
  const auto R = static_cast<std::size_t>(mix.R);
  const std::size_t n_est = 2 * R + 2;
  const std::size_t n_cp = checkpoints.size();

  // values[(trial * n_cp + cp) * n_est + estimator]
  std::vector<double> values(n_trials * n_cp * n_est);
  std::vector<double> mu_sawp(T * R, 0.0);
  std::vector<double> mu_tlosf(T * R, 0.0);

  std::vector<double> log_mu_sawp(T * R, 0.0);
  std::vector<double> log_mu_tlosf(T * R, 0.0);

  struct Partial {
    std::vector<double> mu_sawp;
    std::vector<double> mu_tlosf;
    std::vector<double> log_mu_sawp;
    std::vector<double> log_mu_tlosf;
  };
  auto run_block = [&](std::size_t block, Partial& p) {
    p.mu_sawp.assign(T * R, 0.0);
    p.mu_tlosf.assign(T * R, 0.0);
    p.log_mu_sawp.assign(T * R, 0.0);
    p.log_mu_tlosf.assign(T * R, 0.0);
    const std::size_t first = block * kTrialsPerBlock;
    const std::size_t last = std::min(n_trials, first + kTrialsPerBlock);
    for (std::size_t trial = first; trial < last; ++trial) {
      const TrialOutputs out = run_trial(mix, univ, trial);
      for (std::size_t i = 0; i < T * R; ++i) {
        p.mu_sawp[i] += out.mu_sawp[i];
        p.mu_tlosf[i] += out.mu_tlosf[i];
        p.log_mu_sawp[i] += safe_log(out.mu_sawp[i]);
        p.log_mu_tlosf[i] += safe_log(out.mu_tlosf[i]);
      }
      for (std::size_t c = 0; c < n_cp; ++c) {
        const std::size_t t = checkpoints[c];
        double* row = &values[(trial * n_cp + c) * n_est];
        for (int r = 1; r <= mix.R; ++r) {
          row[estimator_index(OsfKind::sawp, r, mix.R)] = out.fixed(OsfKind::sawp, t, r);
          row[estimator_index(OsfKind::tlosf, r, mix.R)] = out.fixed(OsfKind::tlosf, t, r);
        }
        row[estimator_index(OsfKind::sawp, 0, mix.R)] = out.usawp[t];
        row[estimator_index(OsfKind::tlosf, 0, mix.R)] = out.utlosf[t];
      }
    }
  };

  const std::size_t n_blocks = (n_trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
  const std::size_t workers = worker_count(n_blocks);
  for (std::size_t wave = 0; wave < n_blocks; wave += workers) {
    const std::size_t wave_size = std::min(workers, n_blocks - wave);
    std::vector<Partial> partials(wave_size);
    if (wave_size == 1) {
      run_block(wave, partials[0]);
    } else {
      std::vector<std::thread> threads;
      for (std::size_t i = 0; i < wave_size; ++i) {
        threads.emplace_back([&, i] { run_block(wave + i, partials[i]); });
      }
      for (auto& th : threads) th.join();
    }
    for (const auto& p : partials) {
      for (std::size_t i = 0; i < T * R; ++i) {
        mu_sawp[i] += p.mu_sawp[i];
        mu_tlosf[i] += p.mu_tlosf[i];
        log_mu_sawp[i] += p.log_mu_sawp[i];
        log_mu_tlosf[i] += p.log_mu_tlosf[i];
      }
    }
  }

  StudyResult result;
  auto& metrics = result.metrics;
  metrics.R = mix.R;
  metrics.n_trials = n_trials;
  metrics.lambda = mix.lambda;
  const double inv_n = 1.0 / static_cast<double>(n_trials);
  for (std::size_t c = 0; c < n_cp; ++c) {
    CheckpointMetrics cm;
    cm.checkpoint = checkpoints[c];
    cm.rho = mix.rho.at(checkpoints[c]);
    cm.estimators.resize(n_est);
    for (std::size_t e = 0; e < n_est; ++e) {
      double sum = 0.0;
      for (std::size_t trial = 0; trial < n_trials; ++trial) sum += values[(trial * n_cp + c) * n_est + e];
      const double mean = sum * inv_n;
      double ss = 0.0;
      double se = 0.0;
      for (std::size_t trial = 0; trial < n_trials; ++trial) {
        const double x = values[(trial * n_cp + c) * n_est + e];
        ss += (x - mean) * (x - mean);
        se += (x - mix.lambda) * (x - mix.lambda);
      }
      auto& em = cm.estimators[e];
      em.kind = e <= R ? OsfKind::sawp : OsfKind::tlosf;
      const std::size_t local = e <= R ? e : e - (R + 1);
      em.rank = local == R ? 0 : static_cast<int>(local) + 1;
      em.mean = mean;
      em.variance = ss * inv_n;
      em.bias = mean - mix.lambda;
      em.mse = se * inv_n;
    }
    metrics.checkpoints.push_back(std::move(cm));
  }

  auto make_trace = [&](OsfKind kind, std::vector<double>& sums, std::vector<double>& log_sums) {
    BlendTrace trace;
    trace.kind = kind;
    trace.T = T;
    trace.R = mix.R;
    for (double& v : sums) v *= inv_n;
    for (double& v : log_sums) v *= inv_n;
    trace.mean_mu = std::move(sums);
    trace.mean_log_mu = std::move(log_sums);
    trace.checkpoints = checkpoints;
    std::size_t begin = 0;
    for (std::size_t cp : checkpoints) {
      trace.checkpoint_argmax.push_back(trace.argmax_rank(begin, cp + 1));
      begin = cp + 1;
    }
    return trace;
  };
  result.sawp_trace = make_trace(OsfKind::sawp, mu_sawp, log_mu_sawp);
  result.tlosf_trace = make_trace(OsfKind::tlosf, mu_tlosf, log_mu_tlosf);
  return result;
}

TrialMetrics monte_carlo(const MixtureConfig& mix, const UniversalConfig& univ, std::size_t n_trials,
                         std::vector<std::size_t> checkpoints) {
  return run_study(mix, univ, n_trials, std::move(checkpoints)).metrics;
}

BlendTrace blend_trace(const MixtureConfig& mix, const UniversalConfig& univ, std::size_t n_trials) {
  auto study = run_study(mix, univ, n_trials, default_checkpoints(mix));
  return univ.kind == OsfKind::sawp ? std::move(study.sawp_trace) : std::move(study.tlosf_trace);
}

MonteCarloCurve monte_carlo_variance_curve(OsfKind kind, int R, std::size_t n_trials,
                                           std::uint64_t seed) {
  if (R < 1) throw ArgumentError("R must be at least 1");
  if (n_trials < 2) throw ArgumentError("monte carlo needs at least two trials");
  constexpr std::size_t kBlock = 10000;
  const auto n = static_cast<std::size_t>(R);
  const std::size_t n_blocks = (n_trials + kBlock - 1) / kBlock;

  // Per block: sums of (y - 1) and (y - 1)^2 for every rank. Centring on the
  // known mean keeps the variance free of cancellation.
  std::vector<double> partial(n_blocks * 2 * n, 0.0);
  parallel_ranges(n_blocks, [&](std::size_t b0, std::size_t b1) {
    FixedRankBank bank(kind, R);
    std::vector<double> window(n);
    std::vector<double> y(n);
    for (std::size_t block = b0; block < b1; ++block) {
      Rng rng(seed, block);
      double* sum = &partial[block * 2 * n];
      double* sq = sum + n;
      const std::size_t last = std::min(n_trials, (block + 1) * kBlock);
      for (std::size_t trial = block * kBlock; trial < last; ++trial) {
        for (double& v : window) v = rng.exponential(1.0);
        std::sort(window.begin(), window.end());
        bank.evaluate(window, y);
        for (std::size_t r = 0; r < n; ++r) {
          const double d = y[r] - 1.0;
          sum[r] += d;
          sq[r] += d * d;
        }
      }
    }
  });

  MonteCarloCurve curve;
  curve.kind = kind;
  curve.R = R;
  curve.n_trials = n_trials;
  std::vector<double> sum(n, 0.0);
  std::vector<double> sq(n, 0.0);
  for (std::size_t block = 0; block < n_blocks; ++block) {
    for (std::size_t r = 0; r < n; ++r) {
      sum[r] += partial[block * 2 * n + r];
      sq[r] += partial[block * 2 * n + n + r];
    }
  }
  const double inv = 1.0 / static_cast<double>(n_trials);
  for (std::size_t r = 0; r < n; ++r) {
    const double m = sum[r] * inv;
    curve.means.push_back(1.0 + m);
    curve.variances.push_back(sq[r] * inv - m * m);
  }
  return curve;
}

}  // namespace uosf
