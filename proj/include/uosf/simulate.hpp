#pragma once

#include "uosf/osf.hpp"
#include "uosf/rng.hpp"
#include "uosf/universal.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace uosf {

// Outlier probability as a step function of the iteration index:
// rho(t) = initial + increment * floor(t / period).
struct RhoSchedule {
  double initial = 0.0;
  double increment = 0.02;
  std::size_t period = 500;

  double at(std::size_t t) const;
};

// Two-component exponential mixture: background with mean lambda, outliers
// with mean K * lambda drawn with probability rho(t), independently for
// every element of the window.
struct MixtureConfig {
  double lambda = 1.0;
  double K = 200.0;
  RhoSchedule rho;
  int R = 20;
  std::size_t T = 3000;
  std::uint64_t seed = 1;

  void validate() const;
};

void sample_mixture_window(const MixtureConfig& config, std::size_t t, Rng& rng,
                           std::span<double> out);
std::vector<double> sample_mixture_window(const MixtureConfig& config, std::size_t t, Rng& rng);

// Trajectories of one simulated run. Matrices are T x R row-major with the
// column index r - 1 for rank r.
struct TrialOutputs {
  std::size_t T = 0;
  int R = 0;
  std::vector<double> sawp;
  std::vector<double> tlosf;
  std::vector<double> usawp;
  std::vector<double> utlosf;
  std::vector<double> wosa;      // mean of the window (summed in sorted order)
  std::vector<double> mu_sawp;   // blending weights used at step t
  std::vector<double> mu_tlosf;

  double fixed(OsfKind kind, std::size_t t, int rank) const;
  double universal(OsfKind kind, std::size_t t) const;
};

// One trial: at each t draw a window, sort it, evaluate every fixed-rank SAWP
// and TLOSF filter and both universal filters. `univ` supplies R, c, tau and
// an optional rank subset; its kind is ignored since both kinds run. The
// random stream is keyed by (mix.seed, trial).
TrialOutputs run_trial(const MixtureConfig& mix, const UniversalConfig& univ,
                       std::uint64_t trial = 0);

struct EstimatorMetrics {
  OsfKind kind = OsfKind::sawp;
  int rank = 0;  // 0 for the universal filter
  double mean = 0.0;
  double variance = 0.0;  // across trials, 1/n normalization
  double bias = 0.0;      // mean - lambda
  double mse = 0.0;       // mean of (x - lambda)^2

  bool universal() const { return rank == 0; }
};

struct CheckpointMetrics {
  std::size_t checkpoint = 0;
  double rho = 0.0;
  // sawp ranks 1..R, usawp, tlosf ranks 1..R, utlosf
  std::vector<EstimatorMetrics> estimators;

  const EstimatorMetrics& fixed(OsfKind kind, int rank) const;
  const EstimatorMetrics& universal(OsfKind kind) const;
  // Fixed-rank estimator of the kind with the lowest MSE (lowest rank on ties).
  const EstimatorMetrics& best_fixed(OsfKind kind) const;
  int R() const { return static_cast<int>(estimators.size() / 2) - 1; }
};

struct TrialMetrics {
  int R = 0;
  std::size_t n_trials = 0;
  double lambda = 1.0;
  std::vector<CheckpointMetrics> checkpoints;
};

// Trial-averaged blending weights of one universal filter.
struct BlendTrace {
  OsfKind kind = OsfKind::tlosf;
  std::size_t T = 0;
  int R = 0;
  std::vector<double> mean_mu;      // T x R, arithmetic mean over trials
  std::vector<double> mean_log_mu;  // T x R, mean of ln(mu) over trials
  std::vector<std::size_t> checkpoints;
  // For each checkpoint, argmax rank over the iterations after the previous
  // checkpoint up to and including this one (see argmax_rank).
  std::vector<int> checkpoint_argmax;

  double at(std::size_t t, int rank) const {
    return mean_mu[index(t, rank)];
  }
  double log_at(std::size_t t, int rank) const { return mean_log_mu[index(t, rank)]; }

  // Rank with the largest log-domain mean weight summed over iterations
  // [begin, end). Lowest rank wins ties.
  int argmax_rank(std::size_t begin, std::size_t end) const;
  // Same, using the arithmetic mean weights.
  int argmax_rank_arithmetic(std::size_t begin, std::size_t end) const;

 private:
  std::size_t index(std::size_t t, int rank) const {
    return t * static_cast<std::size_t>(R) + static_cast<std::size_t>(rank - 1);
  }
};

struct StudyResult {
  TrialMetrics metrics;
  BlendTrace sawp_trace;
  BlendTrace tlosf_trace;
};

// The checkpoints closing each rho level: period - 1, 2 * period - 1, ...
std::vector<std::size_t> default_checkpoints(const MixtureConfig& mix);

// Runs n_trials trials (in parallel, reduced in a fixed order) and collects
// checkpoint metrics plus both blend traces. Results do not depend on the
// worker count. Throws ArgumentError if n_trials < 2 or a checkpoint >= T.
StudyResult run_study(const MixtureConfig& mix, const UniversalConfig& univ,
                      std::size_t n_trials, std::vector<std::size_t> checkpoints);

TrialMetrics monte_carlo(const MixtureConfig& mix, const UniversalConfig& univ,
                         std::size_t n_trials, std::vector<std::size_t> checkpoints);

// Trace for univ.kind, with the default checkpoints.
BlendTrace blend_trace(const MixtureConfig& mix, const UniversalConfig& univ, std::size_t n_trials);

// Empirical mean and variance (1/n) of every fixed-rank filter of one kind on
// windows of R i.i.d. unit-mean exponentials. Deterministic for a given seed
// regardless of the worker count.
struct MonteCarloCurve {
  OsfKind kind = OsfKind::sawp;
  int R = 0;
  std::size_t n_trials = 0;
  std::vector<double> means;      // index r - 1
  std::vector<double> variances;  // index r - 1
};

MonteCarloCurve monte_carlo_variance_curve(OsfKind kind, int R, std::size_t n_trials,
                                           std::uint64_t seed);

}  // namespace uosf
