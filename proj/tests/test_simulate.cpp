#include "uosf/error.hpp"
#include "uosf/simulate.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>

using namespace uosf;

namespace {

MixtureConfig small_mix(std::size_t T = 600) {
  MixtureConfig m;
  m.R = 10;
  m.T = T;
  m.rho.period = 200;
  m.rho.increment = 0.05;
  return m;
}

UniversalConfig univ_for(const MixtureConfig& m) {
  UniversalConfig u;
  u.R = m.R;
  u.c = 1.0;
  u.tau = 100;
  return u;
}

}  // namespace

TEST_CASE("rho schedule steps every period") {
  RhoSchedule s;
  CHECK(s.at(0) == 0.0);
  CHECK(s.at(499) == 0.0);
  CHECK(s.at(500) == doctest::Approx(0.02));
  CHECK(s.at(1999) == doctest::Approx(0.06));
  CHECK(s.at(2999) == doctest::Approx(0.10));
}

TEST_CASE("default checkpoints close each rho level") {
  MixtureConfig m;
  CHECK(default_checkpoints(m) == std::vector<std::size_t>{499, 999, 1499, 1999, 2499, 2999});
}

TEST_CASE("mixture config validation") {
  MixtureConfig m;
  CHECK_NOTHROW(m.validate());
  m.lambda = 0.0;
  CHECK_THROWS_AS(m.validate(), ArgumentError);
  m = MixtureConfig{};
  m.K = 1.0;
  CHECK_THROWS_AS(m.validate(), ArgumentError);
  m = MixtureConfig{};
  m.rho.increment = 0.5;
  CHECK_THROWS_AS(m.validate(), ArgumentError);
  m = MixtureConfig{};
  m.T = 0;
  CHECK_THROWS_AS(m.validate(), ArgumentError);
}

TEST_CASE("mixture draws have the expected mean") {
  MixtureConfig m;
  m.R = 50;
  Rng rng(1);
  double clean = 0.0;
  double dirty = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    for (double v : sample_mixture_window(m, 0, rng)) {
      CHECK(v >= 0.0);
      clean += v;
    }
    for (double v : sample_mixture_window(m, 2999, rng)) dirty += v;
  }
  const double draws = 50.0 * n;
  CHECK(clean / draws == doctest::Approx(1.0).epsilon(0.01));
  // rho = 0.10: mean = 0.9 + 0.1 * 200 = 20.9
  CHECK(dirty / draws == doctest::Approx(20.9).epsilon(0.03));
}

TEST_CASE("trials are reproducible and keyed by trial index") {
  const auto m = small_mix(200);
  const auto u = univ_for(m);
  const auto a = run_trial(m, u, 3);
  const auto b = run_trial(m, u, 3);
  const auto c = run_trial(m, u, 4);
  CHECK(a.utlosf == b.utlosf);
  CHECK(a.sawp == b.sawp);
  CHECK(a.utlosf != c.utlosf);
  auto bad = u;
  bad.R = 11;
  CHECK_THROWS_AS(run_trial(m, bad, 0), ArgumentError);
}

TEST_CASE("rank-R tlosf equals the window mean without outliers") {
  auto m = small_mix(300);
  m.rho.increment = 0.0;
  const auto out = run_trial(m, univ_for(m), 0);
  for (std::size_t t = 0; t < m.T; ++t) CHECK(out.fixed(OsfKind::tlosf, t, m.R) == out.wosa[t]);
}

TEST_CASE("recorded blend weights sum to one and start uniform") {
  const auto m = small_mix(200);
  const auto out = run_trial(m, univ_for(m), 0);
  for (int r = 1; r <= m.R; ++r) CHECK(out.mu_tlosf[static_cast<std::size_t>(r - 1)] == doctest::Approx(0.1));
  for (std::size_t t = 0; t < m.T; ++t) {
    double s = 0.0;
    double u = 0.0;
    for (int r = 0; r < m.R; ++r) {
      s += out.mu_sawp[t * 10 + static_cast<std::size_t>(r)];
      u += out.mu_tlosf[t * 10 + static_cast<std::size_t>(r)] * out.fixed(OsfKind::tlosf, t, r + 1);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.utlosf[t] == doctest::Approx(u).epsilon(1e-12));
  }
}

TEST_CASE("study metrics are unbiased at rho = 0 and consistent") {
  const auto m = small_mix(600);
  const std::size_t n = 400;
  const auto res = run_study(m, univ_for(m), n, default_checkpoints(m));
  REQUIRE(res.metrics.checkpoints.size() == 3);
  const auto& cp = res.metrics.checkpoints.front();
  CHECK(cp.R() == 10);
  for (const auto& e : cp.estimators) {
    // 5 standard errors, with variance <= 1 for every rank
    CHECK(std::abs(e.bias) < 5.0 * std::sqrt(1.0 / static_cast<double>(n)));
    CHECK(e.mse == doctest::Approx(e.variance + e.bias * e.bias).epsilon(1e-9));
  }
  CHECK(cp.best_fixed(OsfKind::tlosf).rank == cp.fixed(OsfKind::tlosf, cp.best_fixed(OsfKind::tlosf).rank).rank);
  CHECK(cp.universal(OsfKind::sawp).universal());
}

TEST_CASE("study results do not depend on the worker count") {
  const auto m = small_mix(400);
  const auto u = univ_for(m);
  setenv("UOSF_THREADS", "1", 1);
  const auto a = run_study(m, u, 60, {199, 399});
  setenv("UOSF_THREADS", "3", 1);
  const auto b = run_study(m, u, 60, {199, 399});
  unsetenv("UOSF_THREADS");
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t e = 0; e < a.metrics.checkpoints[c].estimators.size(); ++e) {
      CHECK(a.metrics.checkpoints[c].estimators[e].mse == b.metrics.checkpoints[c].estimators[e].mse);
    }
  }
  CHECK(a.tlosf_trace.mean_mu == b.tlosf_trace.mean_mu);
  CHECK(a.sawp_trace.mean_log_mu == b.sawp_trace.mean_log_mu);
}

TEST_CASE("study argument checks") {
  const auto m = small_mix(100);
  const auto u = univ_for(m);
  CHECK_THROWS_AS(run_study(m, u, 1, {50}), ArgumentError);
  CHECK_THROWS_AS(run_study(m, u, 10, {100}), ArgumentError);
  CHECK_THROWS_AS(run_study(m, u, 10, {}), ArgumentError);
}

TEST_CASE("blend trace favours rank R for tlosf on clean data") {
  auto m = small_mix(300);
  m.rho.increment = 0.0;
  auto u = univ_for(m);
  u.kind = OsfKind::tlosf;
  const auto trace = blend_trace(m, u, 50);
  CHECK(trace.argmax_rank(0, 300) == m.R);
  CHECK(trace.checkpoint_argmax.back() == m.R);
  CHECK(trace.at(0, 1) == doctest::Approx(0.1));
  CHECK(trace.log_at(0, 1) == doctest::Approx(std::log(0.1)));
}

TEST_CASE("monte carlo variance curve matches the closed form") {
  const auto m = exponential_os_moments(20);
  for (OsfKind kind : {OsfKind::sawp, OsfKind::tlosf}) {
    const auto mc = monte_carlo_variance_curve(kind, 20, 200000, 5);
    for (int r = 1; r <= 20; ++r) {
      const auto i = static_cast<std::size_t>(r - 1);
      CHECK(mc.means[i] == doctest::Approx(1.0).epsilon(0.01));
      CHECK(mc.variances[i] == doctest::Approx(osf_variance(make_osf_weights(kind, 20, r), m)).epsilon(0.03));
    }
  }
  CHECK_THROWS_AS(monte_carlo_variance_curve(OsfKind::sawp, 0, 10, 1), ArgumentError);
  CHECK_THROWS_AS(monte_carlo_variance_curve(OsfKind::sawp, 5, 1, 1), ArgumentError);
}

TEST_CASE("monte carlo variance curve is deterministic across worker counts") {
  setenv("UOSF_THREADS", "1", 1);
  const auto a = monte_carlo_variance_curve(OsfKind::tlosf, 8, 30000, 2);
  setenv("UOSF_THREADS", "2", 1);
  const auto b = monte_carlo_variance_curve(OsfKind::tlosf, 8, 30000, 2);
  unsetenv("UOSF_THREADS");
  CHECK(a.variances == b.variances);
}
