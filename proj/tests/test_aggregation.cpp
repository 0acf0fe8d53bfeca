#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "gab/aggregation.hpp"
#include "gab/errors.hpp"

using namespace gab;
using Catch::Approx;

namespace {

// PMF by enumerating all 2^n outcome vectors.
std::vector<double> brute_force_pmf(const std::vector<double>& q) {
  const std::size_t n = q.size();
  std::vector<double> pmf(n + 1, 0.0);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double pr = 1.0;
    int k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        pr *= q[i];
        ++k;
      } else {
        pr *= 1.0 - q[i];
      }
    }
    pmf[static_cast<std::size_t>(k)] += pr;
  }
  return pmf;
}

ExperimentConfig small_experiment(int horizon, int reps) {
  ExperimentConfig cfg;
  cfg.horizon = horizon;
  cfg.burn_in = 1000;
  cfg.reps = reps;
  cfg.seed = 21;
  cfg.tv_stride = 1;
  return cfg;
}

}  // namespace

TEST_CASE("Poisson-binomial PMF examples", "[aggregation]") {
  const auto a = bernoulli_sum_pmf(std::vector<double>{0.5, 0.5});
  CHECK(a[0] == Approx(0.25).margin(1e-15));
  CHECK(a[1] == Approx(0.5).margin(1e-15));
  CHECK(a[2] == Approx(0.25).margin(1e-15));
  const auto b = bernoulli_sum_pmf(std::vector<double>{0.1, 0.2});
  CHECK(b[0] == Approx(0.72).margin(1e-15));
  CHECK(b[1] == Approx(0.26).margin(1e-15));
  CHECK(b[2] == Approx(0.02).margin(1e-15));
  const auto c = bernoulli_sum_pmf(std::vector<double>(4, 0.0));
  CHECK(c[0] == 1.0);
  for (std::size_t k = 1; k < c.size(); ++k) CHECK(c[k] == 0.0);
}

TEST_CASE("Poisson-binomial PMF matches enumeration and moment identities", "[aggregation][property]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 1 + rep % 12;
    std::vector<double> q(static_cast<std::size_t>(n));
    for (auto& v : q) v = u(rng);
    const auto pmf = bernoulli_sum_pmf(q);
    const auto oracle = brute_force_pmf(q);
    double total = 0, mean = 0, m2 = 0, emean = 0, evar = 0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      CHECK(pmf[k] == Approx(oracle[k]).margin(1e-14));
      total += pmf[k];
      mean += k * pmf[k];
      m2 += double(k) * k * pmf[k];
    }
    for (double v : q) {
      emean += v;
      evar += v * (1 - v);
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK(std::abs(mean - emean) < 1e-12);
    CHECK(std::abs(m2 - mean * mean - evar) < 1e-10);
    const auto trunc = bernoulli_sum_pmf(q, 2);
    for (std::size_t k = 0; k < trunc.size(); ++k) CHECK(trunc[k] == Approx(pmf[k]).margin(1e-15));
  }
}

TEST_CASE("Poisson total variation", "[aggregation]") {
  SECTION("Le Cam bound at q = 1.25/1000") {
    const std::vector<double> q(1000, 1.25 / 1000);
    const double tv = poisson_tv_distance(q);
    CHECK(tv > 0.0);
    CHECK(tv <= 1.5625e-3);
    CHECK(poisson_tv_distance_truncated(q) == Approx(tv).margin(1e-11));
  }
  SECTION("single sure event") {
    CHECK(poisson_tv_distance(std::vector<double>{1.0}) == Approx(1.0 - std::exp(-1.0)).margin(1e-12));
  }
  SECTION("all zero") { CHECK(poisson_tv_distance(std::vector<double>(5, 0.0)) == Approx(0.0).margin(1e-15)); }
  SECTION("Le Cam bound on random vectors") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 0.2);
    for (int rep = 0; rep < 30; ++rep) {
      std::vector<double> q(static_cast<std::size_t>(5 + rep * 7));
      double bound = 0.0;
      for (auto& v : q) bound += (v = u(rng)) * v;
      const double tv = poisson_tv_distance(q);
      CHECK(tv <= bound + 1e-12);
      CHECK(poisson_tv_distance_truncated(q) == Approx(tv).margin(1e-11));
    }
  }
}

TEST_CASE("rare-event specs", "[aggregation]") {
  RareEventScaling sc;
  const auto s50 = make_rare_event_spec(sc, 50);
  CHECK(s50.series[3].omega == Approx(0.005).margin(1e-16));
  CHECK(s50.series[3].alpha[0] == Approx(0.01).margin(1e-16));
  CHECK(s50.series[3].beta[0] == 0.6);
  CHECK(s50.series[3].gamma == 0.2);
  const auto s100 = make_rare_event_spec(sc, 100);
  CHECK(s100.series[0].omega == s50.series[0].omega / 2);
  CHECK(s100.series[0].alpha[0] == s50.series[0].alpha[0] / 2);
  RareEventScaling zero = sc;
  zero.c = 0.0;
  const auto traj = simulate(make_rare_event_spec(zero, 50), SimConfig{1, 100, 10, StationaryWarmup{}, 1});
  CHECK((traj.y.array() == 0).all());
  sc.n_grid = {1, 50};
  const auto feas = rare_event_feasibility(sc);
  CHECK_FALSE(feas[0].feasible);
  CHECK(feas[1].feasible);
  CHECK_THROWS_AS(make_rare_event_spec(sc, 1), ValidationError);
}

TEST_CASE("limit parameters", "[aggregation]") {
  const auto lp = limit_parameters(make_rare_event_spec(RareEventScaling{}, 200));
  CHECK(lp.c_bar == Approx(0.25).epsilon(1e-12));
  CHECK(lp.gamma_bar == Approx(0.2).epsilon(1e-12));
  CHECK(lp.mean() == Approx(1.25).epsilon(1e-12));
  CHECK(lp.variance() == Approx(0.25 * 0.04 / ((1 - 0.64) * 0.2)).epsilon(1e-12));
}

TEST_CASE("no feedback reduces to the static Poisson-binomial distance", "[aggregation]") {
  RareEventScaling sc;
  sc.gamma = 0.0;
  sc.a = 0.0;
  const auto spec = make_rare_event_spec(sc, 50);
  const auto d = diagnose_limit(spec, small_experiment(20, 2));
  const std::vector<double> q(50, 0.005 / (1 - 0.6));
  CHECK(d.tv_mean == Approx(poisson_tv_distance(q)).margin(1e-12));
}

TEST_CASE("circulant networks", "[aggregation]") {
  const Matrix w = Matrix(build_regular_network(4, 2).toDense());
  CHECK((w.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-15);
  CHECK((w.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-15);
  CHECK(((w.array() == 0.0) || (w.array() == 0.5)).all());
  const Matrix full = Matrix(build_regular_network(5, 5).toDense());
  CHECK((full.array() - 0.2).abs().maxCoeff() < 1e-15);
  const Matrix perm = Matrix(build_regular_network(6, 1).toDense());
  CHECK((perm * perm.transpose()).isIdentity(1e-15));
  CHECK_THROWS_AS(build_regular_network(4, 0), ValidationError);
  CHECK_THROWS_AS(build_regular_network(4, 5), ValidationError);
  CHECK(network_degree(800, 4.0) == static_cast<int>(std::ceil(4.0 * std::log(800.0))));
}

TEST_CASE("complete network reproduces the interactive model", "[aggregation]") {
  RareEventScaling sc;
  const int n = 40;
  const auto complete = diagnose_limit(make_rare_event_spec(sc, n), small_experiment(200, 3));
  const auto net = diagnose_limit(make_rare_event_network_spec(sc, n, n), small_experiment(200, 3));
  CHECK(net.mean_x == complete.mean_x);
  CHECK(net.var_sum_p == Approx(complete.var_sum_p).epsilon(1e-9));
}

TEST_CASE("limit diagnostics are well formed", "[aggregation]") {
  ExperimentConfig cfg = small_experiment(300, 4);
  cfg.tv_stride = 5;
  RareEventScaling sc;
  sc.n_grid = {50, 200};
  const auto rows = run_limit_experiment(sc, cfg);
  REQUIRE(rows.size() == 2);
  for (const auto& d : rows) {
    CHECK(d.tv_mean >= 0.0);
    CHECK(d.tv_mean <= 1.0);
    CHECK(d.tv_pooled >= 0.0);
    CHECK(d.tv_pooled <= 1.0);
    CHECK(std::isfinite(d.dispersion_ratio));
    CHECK(std::isfinite(d.pit_deviation));
    CHECK(d.limit_mean == Approx(1.25).epsilon(1e-12));
  }
  CHECK(rows[1].max_p < rows[0].max_p);
  CHECK(rows[1].tv_mean < rows[0].tv_mean);
}
