#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace uosf {

// Fixed-rank order statistics filters.
//
// Ranks are 1-based everywhere in this interface: rank 1 is the smallest
// value of the window and rank R the largest. Weight vectors are stored
// 0-based, so the weight for rank r lives at weights[r - 1].

enum class OsfKind { sawp, tlosf, custom };

std::string to_string(OsfKind kind);
OsfKind osf_kind_from_string(const std::string& name);

// R window values sorted ascending.
struct OrderedSample {
  std::vector<double> values;
  std::size_t time_index = 0;

  std::size_t size() const { return values.size(); }
};

// Stable ascending sort. Throws DataError on NaN, infinite or negative values
// and ArgumentError on an empty window.
OrderedSample sort_window(std::span<const double> values, std::size_t time_index = 0);

// alpha_{r0} = sum_{k=R-r0+1}^{R} 1/k, the mean of the r0-th order statistic of
// R unit-mean exponentials. Summed by direct loop with ascending k.
double sawp_alpha(int R, int r0);

// All alpha_r for r = 1..R (index r - 1).
std::vector<double> sawp_alphas(int R);

struct OsfWeights {
  OsfKind kind = OsfKind::custom;
  int threshold_rank = 0;  // r0, 1-based; 0 for custom vectors
  std::vector<double> weights;

  int R() const { return static_cast<int>(weights.size()); }
};

// Single nonzero entry 1/alpha_{r0} at rank r0.
OsfWeights make_sawp_weights(int R, int r0);

// 1/r0 for ranks below r0, (R - r0 + 1)/r0 at r0, zero above. r0 = R gives the
// sample mean.
OsfWeights make_tlosf_weights(int R, int r0);

OsfWeights make_osf_weights(OsfKind kind, int R, int r0);

// Inner product w^T x. Throws ArgumentError on a length mismatch.
double apply_osf(std::span<const double> weights, const OrderedSample& sample);
double apply_osf(const OsfWeights& weights, const OrderedSample& sample);

// sum_r w_r * alpha_r: the expected output for unit-mean exponential data.
// Equals 1 for every unbiased weight vector.
double expected_output(std::span<const double> weights);

// Evaluates every fixed-rank filter of one kind on a sorted window in O(R).
// outputs[r - 1] is the rank-r output. TLOSF uses running prefix sums, so it
// agrees with apply_osf up to rounding; SAWP agrees exactly.
class FixedRankBank {
 public:
  FixedRankBank(OsfKind kind, int R);

  OsfKind kind() const { return kind_; }
  int R() const { return R_; }

  void evaluate(std::span<const double> sorted, std::span<double> outputs) const;

 private:
  OsfKind kind_;
  int R_;
  std::vector<double> inv_alpha_;
};

// Mean vector and covariance matrix of the order statistics of R i.i.d.
// unit-mean exponentials, from the independent spacings representation
// X_(r) = sum_{j=1}^{r} E_j / (R - j + 1).
struct OsMoments {
  int R = 0;
  std::vector<double> means;       // alpha_r, index r - 1
  std::vector<double> covariance;  // R x R row-major

  // 1-based ranks.
  double cov(int r, int s) const {
    return covariance[static_cast<std::size_t>(r - 1) * static_cast<std::size_t>(R) +
                      static_cast<std::size_t>(s - 1)];
  }
};

OsMoments exponential_os_moments(int R);

// w^T Cov w: the variance of the filter output for unit-power exponential data.
double osf_variance(std::span<const double> weights, const OsMoments& moments);
double osf_variance(const OsfWeights& weights, const OsMoments& moments);

struct VarianceCurvePoint {
  OsfKind kind;
  int rank;
  double variance;
};

// Normalized variance of every fixed-rank filter of the given kind.
std::vector<VarianceCurvePoint> variance_curve(OsfKind kind, const OsMoments& moments);

// Rank (1-based) of the smallest variance; the lowest rank wins ties.
int variance_argmin(OsfKind kind, const OsMoments& moments);

}  // namespace uosf
