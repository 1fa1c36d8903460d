#include "uosf/osf.hpp"

#include "uosf/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace uosf {

namespace {

void check_rank(int R, int r0) {
  if (R < 1) throw ArgumentError("window size R must be at least 1");
  if (r0 < 1 || r0 > R) {
    throw ArgumentError("threshold rank " + std::to_string(r0) + " outside [1, " +
                        std::to_string(R) + "]");
  }
}

}  // namespace

std::string to_string(OsfKind kind) {
  switch (kind) {
    case OsfKind::sawp:
      return "sawp";
    case OsfKind::tlosf:
      return "tlosf";
    case OsfKind::custom:
      return "custom";
  }
  return "unknown";
}

OsfKind osf_kind_from_string(const std::string& name) {
  if (name == "sawp") return OsfKind::sawp;
  if (name == "tlosf") return OsfKind::tlosf;
  if (name == "custom") return OsfKind::custom;
  throw ArgumentError("unknown filter kind: " + name);
}

OrderedSample sort_window(std::span<const double> values, std::size_t time_index) {
  if (values.empty()) throw ArgumentError("cannot sort an empty window");
  for (double v : values) {
    if (std::isnan(v)) throw DataError("window contains NaN");
    if (!std::isfinite(v) || v < 0.0) throw DataError("window values must be finite and >= 0");
  }
  OrderedSample out;
  out.values.assign(values.begin(), values.end());
  out.time_index = time_index;
  std::stable_sort(out.values.begin(), out.values.end());
  return out;
}

double sawp_alpha(int R, int r0) {
  check_rank(R, r0);
  double sum = 0.0;
  for (int k = R - r0 + 1; k <= R; ++k) sum += 1.0 / static_cast<double>(k);
  return sum;
}

std::vector<double> sawp_alphas(int R) {
  if (R < 1) throw ArgumentError("window size R must be at least 1");
  std::vector<double> alphas(static_cast<std::size_t>(R));
  for (int r = 1; r <= R; ++r) alphas[static_cast<std::size_t>(r - 1)] = sawp_alpha(R, r);
  return alphas;
}

OsfWeights make_sawp_weights(int R, int r0) {
  check_rank(R, r0);
  OsfWeights w;
  w.kind = OsfKind::sawp;
  w.threshold_rank = r0;
  w.weights.assign(static_cast<std::size_t>(R), 0.0);
  w.weights[static_cast<std::size_t>(r0 - 1)] = 1.0 / sawp_alpha(R, r0);
  return w;
}

OsfWeights make_tlosf_weights(int R, int r0) {
  check_rank(R, r0);
  OsfWeights w;
  w.kind = OsfKind::tlosf;
  w.threshold_rank = r0;
  w.weights.assign(static_cast<std::size_t>(R), 0.0);
  const double inv = 1.0 / static_cast<double>(r0);
  for (int r = 1; r < r0; ++r) w.weights[static_cast<std::size_t>(r - 1)] = inv;
  w.weights[static_cast<std::size_t>(r0 - 1)] = static_cast<double>(R - r0 + 1) * inv;
  return w;
}

OsfWeights make_osf_weights(OsfKind kind, int R, int r0) {
  switch (kind) {
    case OsfKind::sawp:
      return make_sawp_weights(R, r0);
    case OsfKind::tlosf:
      return make_tlosf_weights(R, r0);
    case OsfKind::custom:
      break;
  }
  throw ArgumentError("custom weight vectors have no rank formula");
}

double apply_osf(std::span<const double> weights, const OrderedSample& sample) {
  if (weights.size() != sample.values.size()) {
    throw ArgumentError("weight vector length " + std::to_string(weights.size()) +
                        " does not match window length " + std::to_string(sample.values.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) acc += weights[i] * sample.values[i];
  return acc;
}

double apply_osf(const OsfWeights& weights, const OrderedSample& sample) {
  return apply_osf(std::span<const double>(weights.weights), sample);
}

double expected_output(std::span<const double> weights) {
  const auto alphas = sawp_alphas(static_cast<int>(weights.size()));
  return std::inner_product(weights.begin(), weights.end(), alphas.begin(), 0.0);
}

FixedRankBank::FixedRankBank(OsfKind kind, int R) : kind_(kind), R_(R) {
  if (kind == OsfKind::custom) throw ArgumentError("FixedRankBank needs sawp or tlosf");
  if (R < 1) throw ArgumentError("window size R must be at least 1");
  if (kind == OsfKind::sawp) {
    const auto alphas = sawp_alphas(R);
    inv_alpha_.resize(alphas.size());
    for (std::size_t i = 0; i < alphas.size(); ++i) inv_alpha_[i] = 1.0 / alphas[i];
  }
}

void FixedRankBank::evaluate(std::span<const double> sorted, std::span<double> outputs) const {
  const auto n = static_cast<std::size_t>(R_);
  if (sorted.size() != n || outputs.size() != n) {
    throw ArgumentError("FixedRankBank: dimension mismatch");
  }
  if (kind_ == OsfKind::sawp) {
    for (std::size_t i = 0; i < n; ++i) outputs[i] = sorted[i] * inv_alpha_[i];
    return;
  }
  // TLOSF at rank r: (x_1 + ... + x_{r-1} + (R - r + 1) x_r) / r.
  double prefix = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = static_cast<double>(i + 1);
    outputs[i] = (prefix + static_cast<double>(n - i) * sorted[i]) / r;
    prefix += sorted[i];
  }
}

OsMoments exponential_os_moments(int R) {
  if (R < 1) throw ArgumentError("window size R must be at least 1");
  OsMoments m;
  m.R = R;
  m.means = sawp_alphas(R);
  // Var of the first r spacings, accumulated: v_r = sum_{j=1}^{r} 1/(R-j+1)^2.
  std::vector<double> spacing_var(static_cast<std::size_t>(R));
  double acc = 0.0;
  for (int j = 1; j <= R; ++j) {
    const double d = static_cast<double>(R - j + 1);
    acc += 1.0 / (d * d);
    spacing_var[static_cast<std::size_t>(j - 1)] = acc;
  }
  const auto n = static_cast<std::size_t>(R);
  m.covariance.resize(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t s = 0; s < n; ++s) m.covariance[r * n + s] = spacing_var[std::min(r, s)];
  }
  return m;
}

double osf_variance(std::span<const double> weights, const OsMoments& moments) {
  const auto n = static_cast<std::size_t>(moments.R);
  if (weights.size() != n) throw ArgumentError("weight vector length does not match moments");
  double var = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (weights[r] == 0.0) continue;
    double row = 0.0;
    for (std::size_t s = 0; s < n; ++s) row += moments.covariance[r * n + s] * weights[s];
    var += weights[r] * row;
  }
  return var;
}

double osf_variance(const OsfWeights& weights, const OsMoments& moments) {
  return osf_variance(std::span<const double>(weights.weights), moments);
}

std::vector<VarianceCurvePoint> variance_curve(OsfKind kind, const OsMoments& moments) {
  std::vector<VarianceCurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(moments.R));
  for (int r = 1; r <= moments.R; ++r) {
    curve.push_back({kind, r, osf_variance(make_osf_weights(kind, moments.R, r), moments)});
  }
  return curve;
}

int variance_argmin(OsfKind kind, const OsMoments& moments) {
  const auto curve = variance_curve(kind, moments);
  const auto it = std::min_element(curve.begin(), curve.end(),
                                   [](const auto& a, const auto& b) { return a.variance < b.variance; });
  return it->rank;
}

}  // namespace uosf
