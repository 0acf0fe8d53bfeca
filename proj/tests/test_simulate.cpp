#include <catch_amalgamated.hpp>

#include <cmath>

#include "gab/aggregation.hpp"
#include "gab/errors.hpp"
#include "gab/simulate.hpp"

using namespace gab;
using Catch::Approx;

namespace {

SimConfig config(std::uint64_t seed, int horizon, int burn_in = 200) {
  SimConfig cfg;
  cfg.seed = seed;
  cfg.horizon = horizon;
  cfg.burn_in = burn_in;
  return cfg;
}

}  // namespace

TEST_CASE("forced outcomes", "[simulate]") {
  const auto ones = simulate(make_linear(1.0, 0.0, 0.0), config(1, 50));
  CHECK((ones.p.array() == 1.0).all());
  CHECK((ones.y.array() == 1).all());
  const auto zeros = simulate(make_linear(0.0, 0.0, 0.0), config(1, 50));
  CHECK((zeros.y.array() == 0).all());
}

TEST_CASE("long-run mean of the five-series interactive panel", "[simulate]") {
  const auto spec = make_interactive(0.05, 0.1, 0.2, 0.6, 5);
  SimConfig cfg = config(2024, 200000, 1000);
  cfg.init = fixed_init(0.5);
  const auto traj = simulate(spec, cfg);
  const double mean = traj.y.cast<double>().mean();
  // Batch-mean standard error of the cross-sectional average.
  const int batches = 50, len = cfg.horizon / batches;
  std::vector<double> bm(batches);
  for (int b = 0; b < batches; ++b) bm[b] = traj.y.middleCols(b * len, len).cast<double>().mean();
  double m = 0, v = 0;
  for (double x : bm) m += x;
  m /= batches;
  for (double x : bm) v += (x - m) * (x - m);
  const double se = std::sqrt(v / (batches - 1) / batches);
  CHECK(std::abs(mean - 0.5) < 3.0 * se);
}

TEST_CASE("identical output for any thread count and replay", "[simulate]") {
  const auto spec = make_interactive(0.05, 0.1, 0.2, 0.6, 7);
  SimConfig cfg = config(99, 300);
  const auto a = simulate(spec, cfg, 3);
  cfg.threads = 4;
  const auto b = simulate(spec, cfg, 3);
  CHECK(a.p == b.p);
  CHECK(a.y == b.y);
  CHECK(a.spec_hash == b.spec_hash);
  const auto c = simulate(spec, cfg, 4);
  CHECK_FALSE(a.y == c.y);
}

TEST_CASE("outcome frequency matches the probability under a frozen history", "[simulate]") {
  // One step from a fixed state over many replicates: y = I(u <= p).
  const auto spec = make_linear(0.1, 0.2, 0.3);
  SimConfig cfg = config(5, 1, 0);
  cfg.init = FixedInit{{{0.4}}, {{1}}};
  const int reps = 20000;
  int hits = 0;
  for (int r = 0; r < reps; ++r) {
    const auto t = simulate(spec, cfg, static_cast<std::uint32_t>(r));
    REQUIRE(t.p(0, 0) == Approx(0.1 + 0.2 + 0.12).margin(1e-15));
    hits += t.y(0, 0);
  }
  const double p = 0.42;
  CHECK(std::abs(hits / double(reps) - p) < 4.0 * std::sqrt(p * (1 - p) / reps));
}

TEST_CASE("exchangeable counts are binomial given the history", "[simulate]") {
  const int n = 6;
  const auto spec = make_exchangeable(0.1, 0.3, 0.4, n);
  SimConfig cfg = config(8, 1, 0);
  cfg.init = FixedInit{{{0.25}}, {{1, 0, 0, 1, 0, 0}}};
  const double p = 0.1 + 0.3 * (2.0 / n) + 0.4 * 0.25;
  const int reps = 20000;
  std::vector<int> hist(n + 1, 0);
  for (int r = 0; r < reps; ++r) {
    const auto t = simulate(spec, cfg, static_cast<std::uint32_t>(r));
    ++hist[static_cast<std::size_t>(t.y.col(0).cast<int>().sum())];
  }
  double chi2 = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double e = reps * std::tgamma(n + 1) / (std::tgamma(k + 1) * std::tgamma(n - k + 1)) * std::pow(p, k) *
                     std::pow(1 - p, n - k);
    chi2 += (hist[k] - e) * (hist[k] - e) / e;
  }
  // 99.9% quantile of chi-square with 6 degrees of freedom.
  CHECK(chi2 < 22.46);
}

TEST_CASE("coupling", "[simulate]") {
  SECTION("identical initial conditions stay together") {
    const auto tr = coupled_simulate(make_interactive(0.05, 0.1, 0.2, 0.6, 3), fixed_init(0.3), fixed_init(0.3),
                                     config(1, 100, 0), 5);
    for (double d : tr.mean_distance) CHECK(d == 0.0);
  }
  SECTION("shared shocks: outcome disagreement equals probability gap") {
    // y differs exactly when u falls between p and p'.
    const auto spec = make_linear(0.1, 0.2, 0.3);
    SimConfig ca = config(3, 1, 0), cb = ca;
    ca.init = FixedInit{{{0.0}}, {{0}}};
    cb.init = FixedInit{{{1.0}}, {{1}}};
    const int reps = 20000;
    int differ = 0;
    double gap = 0.0;
    for (int r = 0; r < reps; ++r) {
      const auto a = simulate(spec, ca, static_cast<std::uint32_t>(r));
      const auto b = simulate(spec, cb, static_cast<std::uint32_t>(r));
      differ += a.y(0, 0) != b.y(0, 0);
      gap = std::abs(a.p(0, 0) - b.p(0, 0));
    }
    CHECK(std::abs(differ / double(reps) - gap) < 4.0 * std::sqrt(gap * (1 - gap) / reps));
  }
  SECTION("geometric decay at the spectral rate") {
    const auto tr = coupled_simulate(make_linear(0.1, 0.2, 0.3), fixed_init(0.0), fixed_init(1.0),
                                     config(11, 40, 0), 200);
    CHECK(tr.slope <= std::log(0.5) + 0.05);
  }
  SECTION("log-decay fit recovers an exact geometric sequence") {
    std::vector<double> d;
    for (int t = 0; t < 30; ++t) d.push_back(2.0 * std::pow(0.7, t));
    const auto fit = fit_log_decay(d);
    CHECK(fit.slope == Approx(std::log(0.7)).epsilon(1e-12));
    CHECK(fit.points == 30);
  }
}

TEST_CASE("aggregate counts", "[simulate]") {
  BinaryMatrix y(3, 2);
  y << 1, 0, 0, 0, 1, 1;
  const auto x = aggregate_counts(y);
  CHECK(x.x == std::vector<std::int64_t>{2, 1});
  CHECK(aggregate_counts(BinaryMatrix::Zero(4, 3)).x == std::vector<std::int64_t>{0, 0, 0});
  CHECK(aggregate_counts(BinaryMatrix::Ones(5, 2)).x == std::vector<std::int64_t>{5, 5});
}

TEST_CASE("stationary covariance solvers agree", "[simulate]") {
  std::vector<double> o{0.01, 0.02, 0.005, 0.015}, a{0.05, 0.1, 0.0, 0.02}, g{0.2, 0.1, 0.3, 0.25}, b(4, 0.5);
  const auto spec = make_interactive(o, a, g, b);
  const Matrix direct = stationary_covariance(spec, CovarianceSolver::Direct);
  const Matrix fixed = stationary_covariance(spec, CovarianceSolver::FixedPoint);
  CHECK((direct - fixed).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((direct - direct.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("stationary moments of the rare-event panel", "[simulate]") {
  RareEventScaling sc;
  const auto spec = make_rare_event_spec(sc, 50);
  CHECK(spec.series[0].omega == Approx(0.005).margin(1e-15));
  SimConfig cfg = config(17, 20000, 1000);
  const auto m = stationary_moments(spec, cfg, 4);
  // alpha_i = 0.5 / 50 adds to the persistence at finite N.
  CHECK(m.exact_mean_sum_p == Approx(0.25 / (1 - 0.01 - 0.6 - 0.2)).epsilon(1e-12));
  CHECK(std::abs(m.mc_mean_sum_p - m.exact_mean_sum_p) < 4.0 * m.mc_mean_se);
  CHECK(m.mc_var_sum_p == Approx(m.exact_var_sum_p).epsilon(0.1));
}

TEST_CASE("finite-N variance approaches the limit", "[simulate]") {
  RareEventScaling sc;
  sc.a = 0.0;
  const double limit = 0.25 * 0.04 / ((1 - 0.64) * 0.2);
  double prev = 1e9;
  for (int n : {50, 200, 800}) {
    const auto spec = make_rare_event_spec(sc, n);
    const double v = stationary_covariance(spec, CovarianceSolver::FixedPoint).sum();
    const double err = std::abs(v - limit);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev / limit < 0.01);
  RareEventScaling none = sc;
  none.gamma = 0.0;
  CHECK(stationary_covariance(make_rare_event_spec(none, 800), CovarianceSolver::FixedPoint).sum() < 1e-2);
}
