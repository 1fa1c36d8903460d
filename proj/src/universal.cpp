#include "uosf/universal.hpp"

#include "uosf/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uosf {

void UniversalConfig::validate() const {
  if (R < 1) throw ArgumentError("R must be at least 1");
  if (!(c > 0.0) || !std::isfinite(c)) throw ArgumentError("c must be positive and finite");
  if (tau < 1) throw ArgumentError("tau must be at least 1");
  if (kind == OsfKind::custom) throw ArgumentError("universal config needs kind sawp or tlosf");
  for (int r : ranks) {
    if (r < 1 || r > R) throw ArgumentError("competing rank " + std::to_string(r) + " outside [1, R]");
  }
}

CompetitorPool::CompetitorPool(std::vector<OsfWeights> members) : members_(std::move(members)) {
  if (members_.empty()) throw ArgumentError("competitor pool is empty");
  R_ = members_.front().R();
  if (R_ < 1) throw ArgumentError("competitor weight vectors are empty");
  for (const auto& m : members_) {
    if (m.R() != R_) throw ArgumentError("competitor weight vectors differ in length");
    if (m.kind != OsfKind::custom && (m.threshold_rank < 1 || m.threshold_rank > R_)) {
      throw ArgumentError("competitor has an invalid threshold rank");
    }
    if (m.kind == OsfKind::tlosf) needs_prefix_ = true;
  }
  if (needs_prefix_) prefix_.resize(static_cast<std::size_t>(R_) + 1);
}

CompetitorPool CompetitorPool::from_config(const UniversalConfig& config) {
  config.validate();
  std::vector<OsfWeights> members;
  if (config.ranks.empty()) {
    for (int r = 1; r <= config.R; ++r) members.push_back(make_osf_weights(config.kind, config.R, r));
  } else {
    for (int r : config.ranks) members.push_back(make_osf_weights(config.kind, config.R, r));
  }
  return CompetitorPool(std::move(members));
}

void CompetitorPool::evaluate(std::span<const double> sorted, std::span<double> outputs) const {
  const auto n = static_cast<std::size_t>(R_);
  if (sorted.size() != n) throw ArgumentError("window length does not match pool R");
  if (outputs.size() != members_.size()) throw ArgumentError("output length does not match pool size");
  if (needs_prefix_) {
    prefix_[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) prefix_[i + 1] = prefix_[i] + sorted[i];
  }
  for (std::size_t k = 0; k < members_.size(); ++k) {
    const auto& m = members_[k];
    const auto r = static_cast<std::size_t>(m.threshold_rank);
    switch (m.kind) {
      case OsfKind::sawp:
        outputs[k] = m.weights[r - 1] * sorted[r - 1];
        break;
      case OsfKind::tlosf:
        outputs[k] = (prefix_[r - 1] + static_cast<double>(n - r + 1) * sorted[r - 1]) /
                     static_cast<double>(r);
        break;
      case OsfKind::custom: {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += m.weights[i] * sorted[i];
        outputs[k] = acc;
        break;
      }
    }
  }
}

void blending_weights(std::span<const double> losses, double c, std::span<double> mu) {
  if (losses.empty()) throw ArgumentError("no losses to blend");
  if (mu.size() != losses.size()) throw ArgumentError("blending weight length mismatch");
  if (!(c > 0.0)) throw ArgumentError("c must be positive");
  double lo = std::numeric_limits<double>::infinity();
  for (double l : losses) {
    if (!std::isfinite(l)) throw DataError("non-finite loss");
    lo = std::min(lo, l);
  }
  const double scale = -1.0 / (2.0 * c);
  double total = 0.0;
  for (std::size_t k = 0; k < losses.size(); ++k) {
    mu[k] = std::exp(scale * (losses[k] - lo));
    total += mu[k];
  }
  // total >= 1 because the minimum contributes exp(0).
  for (double& m : mu) m /= total;
}

std::vector<double> blending_weights(std::span<const double> losses, double c) {
  std::vector<double> mu(losses.size());
  blending_weights(losses, c, mu);
  return mu;
}

std::vector<double> universal_weights(std::span<const double> mu, const CompetitorPool& pool) {
  if (mu.size() != pool.size()) throw ArgumentError("blending weights do not match pool size");
  std::vector<double> w(static_cast<std::size_t>(pool.R()), 0.0);
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const auto& member = pool.members()[k].weights;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += mu[k] * member[i];
  }
  return w;
}

std::vector<double> universal_weights(std::span<const double> mu, const UniversalConfig& config) {
  return universal_weights(mu, CompetitorPool::from_config(config));
}

UniversalFilter::UniversalFilter(const UniversalConfig& config)
    : UniversalFilter(CompetitorPool::from_config(config), config.c, config.tau) {}

UniversalFilter::UniversalFilter(CompetitorPool pool, double c, int tau)
    : pool_(std::move(pool)),
      c_(c),
      tau_(tau),
      mu_(pool_.size(), 1.0 / static_cast<double>(pool_.size())),
      outputs_(pool_.size(), 0.0),
      squares_(pool_.size(), 0.0),
      losses_(pool_.size(), tau > 0 ? static_cast<std::size_t>(tau) : 1),
      universal_(2, tau > 0 ? static_cast<std::size_t>(tau) : 1) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ArgumentError("c must be positive and finite");
  if (tau < 1) throw ArgumentError("tau must be at least 1");
}

double UniversalFilter::blend(std::span<const double> outputs) const {
  if (outputs.size() != mu_.size()) throw ArgumentError("output length does not match pool size");
  double acc = 0.0;
  for (std::size_t k = 0; k < mu_.size(); ++k) acc += mu_[k] * outputs[k];
  return acc;
}

void UniversalFilter::observe(std::span<const double> squared_outputs, double universal_output,
                              double universal_square) {
  losses_.push(squared_outputs);
  const double row[2] = {universal_output, universal_square};
  universal_.push(row);
  blending_weights(losses_.sums(), c_, mu_);
  ++t_;
}

double UniversalFilter::step_sorted(std::span<const double> sorted) {
  pool_.evaluate(sorted, outputs_);
  const double estimate = blend(outputs_);
  for (std::size_t k = 0; k < outputs_.size(); ++k) squares_[k] = outputs_[k] * outputs_[k];
  observe(squares_, estimate, estimate * estimate);
  return estimate;
}

double UniversalFilter::step(const OrderedSample& sample) {
  if (sample.values.size() != static_cast<std::size_t>(pool_.R())) {
    throw ArgumentError("sample length " + std::to_string(sample.values.size()) +
                        " does not match R = " + std::to_string(pool_.R()));
  }
  for (std::size_t i = 0; i < sample.values.size(); ++i) {
    const double v = sample.values[i];
    if (!std::isfinite(v)) throw DataError("sample contains non-finite values");
    if (i > 0 && v < sample.values[i - 1]) throw ArgumentError("sample is not sorted ascending");
  }
  return step_sorted(sample.values);
}

double UniversalFilter::variance_estimate() const {
  const std::size_t n = universal_.size();
  if (n < 2) throw StateError("variance estimate needs at least two outputs");
  const double inv = 1.0 / static_cast<double>(n);
  const double mean = universal_.sum(0) * inv;
  return universal_.sum(1) * inv - mean * mean;
}

RegretReport UniversalFilter::regret_report() const {
  if (t_ < static_cast<std::size_t>(tau_)) {
    throw StateError("regret report needs t >= tau (t = " + std::to_string(t_) +
                     ", tau = " + std::to_string(tau_) + ")");
  }
  const double inv_tau = 1.0 / static_cast<double>(tau_);
  const auto sums = losses_.sums();
  std::size_t best = 0;
  for (std::size_t k = 1; k < sums.size(); ++k) {
    if (sums[k] < sums[best]) best = k;
  }
  RegretReport rep;
  rep.per_sample_universal_loss = universal_.sum(1) * inv_tau;
  rep.per_sample_best_fixed_loss = sums[best] * inv_tau;
  rep.best_member = static_cast<int>(best);
  rep.bound_term = 2.0 * c_ * inv_tau * std::log(static_cast<double>(pool_.size()));
  rep.bound_slack = rep.per_sample_best_fixed_loss + rep.bound_term - rep.per_sample_universal_loss;
  rep.A_observed = losses_.max_value();
  rep.c_covers_A = c_ >= rep.A_observed;
  rep.bound_satisfied = rep.per_sample_universal_loss <=
                        rep.per_sample_best_fixed_loss + rep.bound_term + 1e-9;
  return rep;
}

bool UniversalFilter::sums_consistent(double rel_tol) const {
  return losses_.consistent(rel_tol) && universal_.consistent(rel_tol);
}

}  // namespace uosf
