// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gab/aggregation.hpp"
#include "gab/binary_mle.hpp"
#include "gab/csv.hpp"
#include "gab/pipeline.hpp"
#include "gab/poisson_ar.hpp"
#include "gab/simulate.hpp"

using namespace gab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Trajectory run(const ModelSpec& spec, int horizon, std::uint64_t seed, std::uint32_t rep = 0, int burn_in = 1000) {
  SimConfig cfg;
  cfg.seed = seed;
  cfg.horizon = horizon;
  cfg.burn_in = burn_in;
  return simulate(spec, cfg, rep);
}

// 1. Long-run means.
Outcome ac1() {
  const auto lin = run(make_linear(0.1, 0.2, 0.3), 2'000'000, 101);
  const double m_lin = lin.y.cast<double>().mean();
  auto spec = make_interactive(0.05, 0.1, 0.2, 0.6, 5);
  SimConfig cfg;
  cfg.seed = 102;
  cfg.horizon = 2'000'000;
  cfg.init = fixed_init(0.5);
  const double m_int = simulate(spec, cfg).y.cast<double>().mean();
  const bool ok = rel(m_lin, 0.2) <= 0.01 && rel(m_int, 0.5) <= 0.01;
  return {ok, fmt("linear mean %.5f (target 0.2), interactive mean %.5f (target 0.5)", m_lin, m_int)};
}

// 2. Coupling decay.
Outcome ac2() {
  const auto spec = make_linear(0.1, 0.2, 0.3);
  SimConfig cfg;
  cfg.seed = 201;
  cfg.horizon = 40;
  cfg.burn_in = 0;
  const auto tr = coupled_simulate(spec, fixed_init(0.0), fixed_init(1.0), cfg, 200);
  const auto same = coupled_simulate(spec, fixed_init(0.3), fixed_init(0.3), cfg, 200);
  const bool zero = std::all_of(same.mean_distance.begin(), same.mean_distance.end(), [](double d) { return d == 0.0; });
  const double bound = std::log(0.5) + 0.05;
  return {tr.slope <= bound && zero,
          fmt("slope %.4f (bound %.4f, %d points), identical starts %s", tr.slope, bound, tr.fit_points,
              zero ? "stay at distance 0" : "diverged")};
}

// 3. Poisson approximation bound and Poisson-binomial moments.
Outcome ac3() {
  const std::vector<double> q(1000, 1.25 / 1000);
  const double tv = poisson_tv_distance(q);
  std::mt19937_64 rng(301);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> p(static_cast<std::size_t>(1 + rep * 10));
    double em = 0, ev = 0;
    for (auto& v : p) {
      v = u(rng);
      em += v;
      ev += v * (1 - v);
    }
    const auto pmf = bernoulli_sum_pmf(p);
    double total = 0, m = 0, m2 = 0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      total += pmf[k];
      m += double(k) * pmf[k];
      m2 += double(k) * double(k) * pmf[k];
    }
    worst = std::max({worst, std::abs(total - 1.0), std::abs(m - em), std::abs(m2 - m * m - ev)});
  }
  return {tv <= 1.5625e-3 && worst <= 1e-10,
          fmt("TV %.6e (bound 1.5625e-3), worst moment error %.2e", tv, worst)};
}

ExperimentConfig limit_config(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.horizon = 2000;
  cfg.reps = 200;
  cfg.seed = seed;
  return cfg;
}

// 4. Rare-event limit on the N grid.
Outcome ac4() {
  RareEventScaling sc;
  sc.n_grid = {50, 200, 800};
  const auto rows = run_limit_experiment(sc, limit_config(401));
  const auto& last = rows.back();
  int inversions = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) inversions += rows[k].tv_mean >= rows[k - 1].tv_mean;
  const bool ok = rel(last.mean_x, 1.25) <= 0.05 && rel(last.var_sum_p, 0.1389) <= 0.10 && inversions <= 1;
  std::string tvs;
  for (const auto& d : rows) tvs += fmt(" %d:%.3e", d.n, d.tv_mean);
  return {ok, fmt("N=800 E[X] %.4f (1.25), Var(sum p) %.4f (0.1389), TV%s, inversions %d", last.mean_x,
                  last.var_sum_p, tvs.c_str(), inversions)};
}

// 5. Regular network against the complete graph.
Outcome ac5() {
  RareEventScaling sc;
  sc.n_grid = {800};
  const auto cmp = run_network_limit_experiment(sc, 4.0, limit_config(501)).front();
  const bool ok = cmp.rel_diff_mean_x <= 0.05 && cmp.rel_diff_var_sum_p <= 0.05;
  return {ok, fmt("d=%d, E[X] rel diff %.4f, Var(sum p) rel diff %.4f", cmp.network.degree, cmp.rel_diff_mean_x,
                  cmp.rel_diff_var_sum_p)};
}

Vector random_theta(const ParamLayout& layout, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector theta(layout.size());
  for (int b = 0; b < layout.blocks; ++b) {
    Vector block(layout.block_size);
    if (layout.simplex) {
      double sum = 0.0;
      for (int j = 0; j < layout.block_size; ++j) sum += block[j] = 0.05 + u(rng);
      block *= (0.3 + 0.6 * u(rng)) / sum;
    } else {
      for (int j = 0; j < layout.block_size; ++j) block[j] = -1.0 + 2.0 * u(rng);
    }
    theta.segment(b * layout.block_size, layout.block_size) = block;
  }
  return theta;
}

// 6. Analytic score against fourth-order central differences.
Outcome ac6() {
  std::vector<std::pair<std::string, ModelSpec>> families{
      {"LinearUnivariate", make_linear(0.1, 0.2, 0.3)},
      {"LinearMultiLag", make_linear_multilag(0.1, {0.1, 0.05}, {0.2, 0.1})},
      {"Logit11", make_logit(-1.0, 0.5, 0.4)},
      {"Exchangeable", make_exchangeable(0.1, 0.3, 0.4, 4)},
      {"Interactive", make_interactive(0.05, 0.1, 0.2, 0.5, 3)},
  };
  {
    Matrix w = Matrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) w(i, (i + 1) % 4) = w(i, (i + 2) % 4) = 0.5;
    const std::vector<double> o(4, 0.05), a(4, 0.1), g(4, 0.2), b(4, 0.5);
    families.emplace_back("Network", make_network(o, a, g, b, to_sparse(w)));
  }
  std::mt19937_64 rng(601);
  double worst = 0.0;
  std::string worst_family;
  for (const auto& [name, proto] : families) {
    const auto layout = make_layout(proto);
    for (int rep = 0; rep < 20; ++rep) {
      const Vector theta = random_theta(layout, rng);
      const ModelSpec spec = unpack(theta, layout, proto);
      const auto y = run(spec, 200, 610 + rep, 0, 200).y;
      const Vector an = score(spec, y);
      Vector fd(theta.size());
      const double h = 1e-4;
      for (Eigen::Index j = 0; j < theta.size(); ++j) {
        auto f = [&](double step) {
          Vector t = theta;
          t[j] += step;
          return loglik(unpack(t, layout, proto), y);
        };
        fd[j] = (8.0 * (f(h) - f(-h)) - (f(2 * h) - f(-2 * h))) / (12.0 * h);
      }
      const double err = (an - fd).cwiseAbs().maxCoeff() / an.cwiseAbs().maxCoeff();
      if (err > worst) {
        worst = err;
        worst_family = name;
      }
    }
  }
  return {worst <= 1e-6, fmt("worst relative error %.2e (%s), 20 points x %zu families", worst,
                             worst_family.c_str(), families.size())};
}

// 7. Information equality.
Outcome ac7() {
  const auto spec = make_exchangeable(0.1, 0.3, 0.4, 10);
  const auto y = run(spec, 50000, 701).y;
  const auto r = evaluate_likelihood(spec, y, {}, {true, true, true});
  const double d = (r.fisher - r.opg).norm() / r.fisher.norm();
  return {d <= 0.05, fmt("||H - OPG||_F / ||H||_F = %.4f at T=5e4", d)};
}

// 8. Root-T convergence and Wald coverage.
Outcome ac8() {
  const auto truth = make_exchangeable(0.1, 0.3, 0.4, 10);
  const auto start = make_exchangeable(0.2, 0.2, 0.2, 10);
  const auto layout = make_layout(truth);
  const Vector theta0 = pack(truth, layout);
  FitConfig cfg;
  cfg.starts = 2;
  std::vector<double> med;
  for (int t : {2000, 8000, 32000}) {
    std::vector<double> err;
    for (int rep = 0; rep < 200; ++rep) {
      cfg.seed = static_cast<std::uint64_t>(rep);
      const auto fit = fit_mle(start, run(truth, t, 801, static_cast<std::uint32_t>(rep)).y, cfg);
      err.push_back((fit.theta - theta0).norm());
    }
    med.push_back(median(err));
  }
  const double r1 = med[0] / med[1], r2 = med[1] / med[2];
  std::vector<int> covered(3, 0);
  int reps = 0;
  for (int rep = 0; rep < 200; ++rep) {
    cfg.seed = static_cast<std::uint64_t>(rep);
    const auto fit = fit_mle(start, run(truth, 20000, 802, static_cast<std::uint32_t>(rep)).y, cfg);
    if (!fit.fisher_ok) continue;
    ++reps;
    for (int j = 0; j < 3; ++j) covered[j] += std::abs(fit.theta[j] - theta0[j]) <= 1.959963984540054 * fit.std_errors[j];
  }
  bool cov_ok = reps == 200;
  std::string cov;
  for (int j = 0; j < 3; ++j) {
    const double c = covered[j] / double(std::max(reps, 1));
    cov_ok = cov_ok && c >= 0.90 && c <= 0.99;
    cov += fmt(" %s %.3f", layout.labels[j].c_str(), c);
  }
  const bool ok = r1 >= 1.6 && r1 <= 2.4 && r2 >= 1.6 && r2 <= 2.4 && cov_ok;
  return {ok, fmt("median error %.4f/%.4f/%.4f, ratios %.3f %.3f, coverage%s", med[0], med[1], med[2], r1, r2,
                  cov.c_str())};
}

// 9. Poisson autoregression recovery.
Outcome ac9() {
  PoissonParams truth;
  truth.c_bar = 0.25;
  truth.gamma_bar = 0.2;
  truth.beta = 0.6;
  int success = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = simulate_poisson_ar(truth, 10000, 900 + static_cast<std::uint64_t>(rep)).x;
    const auto fit = fit_poisson_mle(x);
    const bool ok = fit.std_errors.allFinite() && std::abs(fit.params.c_bar - 0.25) <= 3 * fit.std_errors[0] &&
                    std::abs(fit.params.gamma_bar - 0.2) <= 3 * fit.std_errors[1] &&
                    std::abs(fit.params.beta - 0.6) <= 3 * fit.std_errors[2];
    success += ok;
  }
  return {success >= 90, fmt("%d/100 replications within 3 SE", success)};
}

// 10. Forecast benchmarks.
Outcome ac10() {
  const auto iid = run(make_linear(0.2, 0.0, 0.0, 10), 20000, 1001).y;
  const int start = 10000;
  const BinaryMatrix hold = iid.rightCols(iid.cols() - start);
  const double m3 = mse_eval(forecast_constant(iid, start, 0.05), hold).pooled;
  const double m4 = mse_eval(forecast_persistence(iid, start), hold).pooled;

  // Interactive panel with tail-event frequency near 0.05, heterogeneous
  // intercepts and heterogeneous exposure to the aggregate.
  const int n = 20;
  std::vector<double> omega(n), alpha(n, 0.0), gamma(n), beta(n, 0.5);
  for (int i = 0; i < n; ++i) {
    const double x = 2.0 * i / (n - 1) - 1.0;
    omega[i] = 0.005 * (1.0 + 0.6 * x);
    gamma[i] = 0.3 * (1.0 - 0.5 * x);
  }
  const auto dgp = make_interactive(omega, alpha, gamma, beta);
  const auto y = run(dgp, 20000, 1002).y;
  const int t_est = 10000;
  const BinaryMatrix est = y.leftCols(t_est), realized = y.rightCols(y.cols() - t_est);
  FitConfig cfg;
  cfg.seed = 1003;
  const auto fit = fit_mle(make_interactive(0.01, 0.05, 0.2, 0.5, n), est, cfg);
  const double s1 = mse_eval(forecast_one_step(fit, y, t_est), realized).pooled;
  const auto poisson = fit_poisson_mle(aggregate_counts(est).x);
  const double s2 = mse_eval(forecast_one_step(calibrate_binary_from_poisson(poisson.params, n), y, t_est), realized).pooled;
  const double s3 = mse_eval(forecast_constant(y, t_est, 0.05), realized).pooled;
  const double s4 = mse_eval(forecast_persistence(y, t_est), realized).pooled;
  const bool ok = rel(m3, 0.1825) <= 0.02 && rel(m4, 0.32) <= 0.02 && s1 <= s2 && s2 <= s3 && s3 < s4;
  return {ok, fmt("iid: model 3 %.5f (0.1825), model 4 %.5f (0.32); interactive: %.5f <= %.5f <= %.5f < %.5f",
                  m3, m4, s1, s2, s3, s4)};
}

// 11. Binary panel calibrated from Poisson estimates refits to them.
Outcome ac11() {
  PoissonParams target;
  target.c_bar = 0.049;
  target.gamma_bar = 0.24;
  target.beta = 0.75;
  const auto spec = calibrate_binary_from_poisson(target, 87);
  const bool valid = validate_spec(spec).ok();
  const auto x = aggregate_counts(run(spec, 10000, 1101).y).x;
  const auto fit = fit_poisson_mle(x);
  const double z0 = (fit.params.c_bar - target.c_bar) / fit.std_errors[0];
  const double z1 = (fit.params.gamma_bar - target.gamma_bar) / fit.std_errors[1];
  const double z2 = (fit.params.beta - target.beta) / fit.std_errors[2];
  const bool ok = valid && std::abs(z0) <= 3 && std::abs(z1) <= 3 && std::abs(z2) <= 3;
  return {ok, fmt("valid %s, estimates (%.4f, %.4f, %.4f), z-scores (%.2f, %.2f, %.2f)", valid ? "yes" : "no",
                  fit.params.c_bar, fit.params.gamma_bar, fit.params.beta, z0, z1, z2)};
}

std::string day(int k) {
  const int year = 2000 + k / (12 * 28), month = 1 + (k / 28) % 12, d = 1 + k % 28;
  return fmt("%04d-%02d-%02d", year, month, d);
}

void write_market(const std::filesystem::path& dir, int t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const int n = 8, k = 3;
  WideTable r, f;
  r.index_name = f.index_name = "date";
  f.columns = {"rf", "mkt", "smb", "hml"};
  for (int i = 0; i < n; ++i) r.columns.push_back(fmt("s%02d", i));
  r.values.resize(t, n);
  f.values.resize(t, k + 1);
  Matrix load(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) load(i, j) = z(rng);
  for (int s = 0; s < t; ++s) {
    r.index.push_back(day(s));
    f.index.push_back(day(s));
    f.values(s, 0) = 1e-4;
    for (int j = 0; j < k; ++j) f.values(s, j + 1) = 0.01 * z(rng);
    for (int i = 0; i < n; ++i) {
      double v = f.values(s, 0) + 0.02 * z(rng) * (1.0 + 0.5 * (s % 7 == 0));
      for (int j = 0; j < k; ++j) v += load(i, j) * f.values(s, j + 1);
      r.values(s, i) = v;
    }
  }
  write_wide_csv((dir / "returns.csv").string(), r);
  write_wide_csv((dir / "factors.csv").string(), f);
}

// 12. Thresholds use only the estimation window.
Outcome ac12() {
  const auto dir = std::filesystem::temp_directory_path() / "gab_acceptance_pipeline";
  std::filesystem::create_directories(dir);
  const std::string split_date = day(599);
  auto bytes = [](const WideTable& t) {
    std::ostringstream out;
    write_wide_csv(out, t);
    return out.str();
  };
  write_market(dir, 800, 1201);
  const auto a = run_pipeline((dir / "returns.csv").string(), (dir / "factors.csv").string(), split_date);
  write_market(dir, 1200, 1201);
  const auto b = run_pipeline((dir / "returns.csv").string(), (dir / "factors.csv").string(), split_date);
  std::filesystem::remove_all(dir);
  const bool same_thresholds = bytes(thresholds_table(a.panel)) == bytes(thresholds_table(b.panel));
  const bool same_prefix = a.panel.y == b.panel.y.leftCols(a.panel.y.cols());

  const Matrix transformed = (a.residuals.array().cube() + 2.0 * a.residuals.array()).exp();
  const auto c = threshold_binary(transformed, 0.05, a.panel.split);
  const bool invariant = c.y == a.panel.y;
  return {same_thresholds && same_prefix && invariant,
          fmt("thresholds byte-identical %s, overlapping panel identical %s, monotone invariance %s, split %d",
              same_thresholds ? "yes" : "no", same_prefix ? "yes" : "no", invariant ? "yes" : "no", a.panel.split)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
  double time_limit;  // seconds, 0 = none
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "long-run means", ac1, 30},
      {2, "coupling decay", ac2, 60},
      {3, "Poisson approximation bound", ac3, 0},
      {4, "rare-event limit", ac4, 600},
      {5, "network limit", ac5, 600},
      {6, "score vs finite differences", ac6, 0},
      {7, "information equality", ac7, 0},
      {8, "root-T rate and coverage", ac8, 900},
      {9, "Poisson MLE recovery", ac9, 0},
      {10, "forecast benchmarks", ac10, 0},
      {11, "calibration map", ac11, 0},
      {12, "pipeline no-lookahead", ac12, 0},
  };
  std::set<int> wanted;
  for (int k = 1; k < argc; ++k) wanted.insert(std::atoi(argv[k]));
  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit > 0 && secs > c.time_limit) {
      o.pass = false;
      o.detail += fmt("; exceeded %.0f s", c.time_limit);
    }
    failed += !o.pass;
    std::printf("AC%-2d %s  %s: %s [%.1f s]\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
