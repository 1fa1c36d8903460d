#pragma once

#include "uosf/osf.hpp"
#include "uosf/window_sums.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace uosf {

// Universal (blended) order statistics filter.
//
// A pool of fixed-rank filters competes; each step the output is the convex
// combination sum_k mu_k(t) * y_k(t) of their outputs, where
//
//   mu_k(t) = exp(-l_k(t-1) / 2c) / sum_j exp(-l_j(t-1) / 2c)
//   l_k(t)  = sum over the last tau steps of y_k^2
//
// Before tau steps have been seen the loss covers all available steps.
//
// Choosing c: the per-sample regret bound (2c/tau) ln R holds when c is at
// least A, the largest squared fixed-rank output over the window (this makes
// exp(-y^2/2c) concave on the range of outputs). regret_report() returns the
// observed A so callers can check their choice of c against it.

struct UniversalConfig {
  int R = 20;
  OsfKind kind = OsfKind::tlosf;
  double c = 1.0;
  int tau = 250;
  // Competing ranks (1-based). Empty means all ranks 1..R.
  std::vector<int> ranks;

  void validate() const;
};

// The set of weight vectors that compete in a blend. Members are usually all
// SAWP or all TLOSF ranks of one R, but any list of length-R vectors works.
class CompetitorPool {
 public:
  explicit CompetitorPool(std::vector<OsfWeights> members);
  static CompetitorPool from_config(const UniversalConfig& config);

  std::size_t size() const { return members_.size(); }
  int R() const { return R_; }
  const std::vector<OsfWeights>& members() const { return members_; }

  // outputs[k] = members[k]^T sorted. SAWP and TLOSF members are evaluated
  // in O(1) each from the sorted window and its prefix sums.
  void evaluate(std::span<const double> sorted, std::span<double> outputs) const;

 private:
  std::vector<OsfWeights> members_;
  int R_ = 0;
  bool needs_prefix_ = false;
  mutable std::vector<double> prefix_;
};

// Softmax of -losses / 2c, with the minimum loss subtracted inside the
// exponent. Throws DataError on non-finite losses and ArgumentError on c <= 0.
std::vector<double> blending_weights(std::span<const double> losses, double c);
void blending_weights(std::span<const double> losses, double c, std::span<double> mu);

// w_u = sum_k mu_k * w^(k).
std::vector<double> universal_weights(std::span<const double> mu, const CompetitorPool& pool);
std::vector<double> universal_weights(std::span<const double> mu, const UniversalConfig& config);

struct RegretReport {
  double per_sample_universal_loss = 0.0;
  double per_sample_best_fixed_loss = 0.0;
  int best_member = 0;  // pool index of the lowest loss (lowest index wins ties)
  double bound_term = 0.0;  // (2c/tau) ln(pool size)
  double bound_slack = 0.0;  // best + bound_term - universal
  double A_observed = 0.0;   // max squared fixed-rank output over the window
  bool c_covers_A = false;   // c >= A_observed
  bool bound_satisfied = false;
};

// One instance per frequency bin / data stream. Single writer: step() mutates
// the state; distinct instances are independent.
class UniversalFilter {
 public:
  explicit UniversalFilter(const UniversalConfig& config);
  UniversalFilter(CompetitorPool pool, double c, int tau);

  // Validated step on an ordered window. Returns the blended estimate, which
  // uses weights computed from losses up to the previous step.
  double step(const OrderedSample& sample);

  // Same as step() for an already sorted window, without value checks.
  double step_sorted(std::span<const double> sorted);

  // Building blocks for callers that aggregate losses across streams.
  // blend() applies the current weights to member outputs; observe() pushes
  // one step of squared member outputs and the universal output, then
  // refreshes the weights and advances t.
  double blend(std::span<const double> outputs) const;
  void observe(std::span<const double> squared_outputs, double universal_output,
               double universal_square);

  std::span<const double> mu() const { return mu_; }
  std::span<const double> last_outputs() const { return outputs_; }
  std::span<const double> losses() const { return losses_.sums(); }
  double universal_loss() const { return universal_.sum(1); }
  std::size_t t() const { return t_; }
  std::size_t window_fill() const { return universal_.size(); }

  const CompetitorPool& pool() const { return pool_; }
  double c() const { return c_; }
  int tau() const { return tau_; }

  // Sample variance of the universal output over the filled window:
  // (1/tau') l_u - ((1/tau') sum y_u)^2 with tau' = min(t, tau). Needs at
  // least two outputs; throws StateError otherwise.
  double variance_estimate() const;

  // Requires t >= tau; throws StateError otherwise.
  RegretReport regret_report() const;

  bool sums_consistent(double rel_tol = 1e-9) const;

 private:
  CompetitorPool pool_;
  double c_;
  int tau_;
  std::size_t t_ = 0;
  std::vector<double> mu_;
  std::vector<double> outputs_;
  std::vector<double> squares_;
  WindowedSums losses_;
  WindowedSums universal_;  // channels: output, output^2
};

}  // namespace uosf
