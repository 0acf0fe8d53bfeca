#include "gab/poisson_ar.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gab/errors.hpp"
#include "gab/optimize.hpp"
#include "gab/rng.hpp"
#include "gab/transform.hpp"

namespace gab {

double PoissonParams::stationary_mean() const {
  double persistence = gamma_bar + beta;
  if (nonlinear) {
    persistence = gamma_bar;
    for (int tau = 0; tau < nonlinear->lags(); ++tau) {
      const auto k = static_cast<std::size_t>(tau);
      persistence += nonlinear->beta[k] + nonlinear->weight_x[k] + nonlinear->weight_lambda[k];
    }
  }
  if (!(persistence < 1.0)) {
    throw DegenerateMean("intensity persistence " + std::to_string(persistence) +
                         " is not below 1; no stationary mean");
  }
  return c_bar / (1.0 - persistence);
}

void validate_poisson(const PoissonParams& p) {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError(std::string(name) + " must be finite and nonnegative, got " +
                            std::to_string(v));
    }
  };
  check(p.c_bar, "c_bar");
  check(p.gamma_bar, "gamma_bar");
  check(p.beta, "beta");
  if (p.nonlinear) {
    const auto& nl = *p.nonlinear;
    if (nl.beta.empty()) throw ValidationError("nonlinear block needs at least one lag");
    if (nl.weight_x.size() != nl.beta.size() || nl.weight_lambda.size() != nl.beta.size()) {
      throw ShapeMismatch("nonlinear block: beta, weight_x and weight_lambda must have equal length");
    }
    for (double v : nl.beta) check(v, "beta_tau");
    for (double v : nl.weight_x) check(v, "weight_x");
    for (double v : nl.weight_lambda) check(v, "weight_lambda");
    check(nl.cap, "cap");
  }
}

namespace {

int lag_count(const PoissonParams& p) { return p.nonlinear ? p.nonlinear->lags() : 1; }

// One step of the recursion. xs(j) and ls(j) return X and lambda j periods
// back (j = 0 is the most recent X, j = 1 the most recent lambda).
template <class XAt, class LAt>
double step(const PoissonParams& p, XAt xs, LAt ls) {
  if (!p.nonlinear) return p.c_bar + p.gamma_bar * xs(0) + p.beta * ls(1);
  const auto& nl = *p.nonlinear;
  double v = p.c_bar + p.gamma_bar * aggregate_term_value(nl.term, xs(0), nl.cap);
  for (int tau = 1; tau <= nl.lags(); ++tau) v += nl.beta[static_cast<std::size_t>(tau - 1)] * ls(tau);
  for (int tau = 1; tau <= nl.lags(); ++tau) {
    const auto k = static_cast<std::size_t>(tau - 1);
    v += nl.weight_x[k] * xs(tau - 1) + nl.weight_lambda[k] * ls(tau);
  }
  return v;
}

// Runs the recursion over the doubles `x`, with s presample values each.
std::vector<double> run_filter(const PoissonParams& p, const std::vector<double>& x,
                               const std::vector<double>& x_pre, const std::vector<double>& l_pre) {
  const int s = lag_count(p);
  const auto T = static_cast<long>(x.size());
  std::vector<double> out(x.size());
  for (long k = 0; k < T; ++k) {
    auto xs = [&](int j) {
      const long idx = k - j;
      return idx >= 0 ? x[static_cast<std::size_t>(idx)] : x_pre[static_cast<std::size_t>(s + idx)];
    };
    auto ls = [&](int j) {
      const long idx = k - j;
      return idx >= 0 ? out[static_cast<std::size_t>(idx)] : l_pre[static_cast<std::size_t>(s + idx)];
    };
    out[static_cast<std::size_t>(k)] = step(p, xs, ls);
  }
  return out;
}

std::vector<double> as_double(const std::vector<std::int64_t>& x) {
  std::vector<double> d(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (x[t] < 0) throw ValidationError("counts must be nonnegative (index " + std::to_string(t) + ")");
    d[t] = static_cast<double>(x[t]);
  }
  return d;
}

}  // namespace

std::vector<double> filter_lambda(const PoissonParams& params, const std::vector<std::int64_t>& x,
                                  double lambda0) {
  if (!(lambda0 >= 0.0)) throw ValidationError("lambda0 must be nonnegative");
  PoissonParams linear = params;
  linear.nonlinear.reset();
  return run_filter(linear, as_double(x), {0.0}, {lambda0});
}

std::vector<double> filter_lambda_general(const PoissonParams& params,
                                          const std::vector<std::int64_t>& x,
                                          const std::vector<double>& x_presample,
                                          const std::vector<double>& lambda_presample) {
  validate_poisson(params);
  const auto s = static_cast<std::size_t>(lag_count(params));
  if (x_presample.size() != s || lambda_presample.size() != s) {
    throw ShapeMismatch("presample must hold " + std::to_string(s) + " values of X and lambda");
  }
  return run_filter(params, as_double(x), x_presample, lambda_presample);
}

std::vector<double> intensity_path(const PoissonParams& params, const std::vector<std::int64_t>& x,
                                   double lambda_pre, double x_pre) {
  const auto s = static_cast<std::size_t>(lag_count(params));
  std::vector<double> shifted = as_double(x);
  if (!shifted.empty()) {
    shifted.pop_back();
    shifted.insert(shifted.begin(), x_pre);
  }
  return run_filter(params, shifted, std::vector<double>(s, x_pre), std::vector<double>(s, lambda_pre));
}

PoissonLoglik poisson_loglik(const std::vector<std::int64_t>& x, const std::vector<double>& lambda) {
  if (x.size() != lambda.size()) throw ShapeMismatch("counts and intensities differ in length");
  PoissonLoglik r;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double l = lambda[t];
    const auto k = static_cast<double>(x[t]);
    if (x[t] < 0) throw ValidationError("counts must be nonnegative");
    if (!(l >= 0.0)) throw DomainError("negative intensity at index " + std::to_string(t));
    if (l == 0.0) {
      if (x[t] > 0) {
        r.zero_intensity = true;
        r.value = -std::numeric_limits<double>::infinity();
        return r;
      }
      continue;
    }
    r.value += -l + k * std::log(l) - std::lgamma(k + 1.0);
  }
  return r;
}

PoissonLoglik poisson_loglik(const PoissonParams& params, const std::vector<std::int64_t>& x,
                             double lambda0) {
  validate_poisson(params);
  return poisson_loglik(x, intensity_path(params, x, lambda0, lambda0));
}

namespace {

struct LinearEval {
  double loglik = 0.0;
  Eigen::Vector3d score = Eigen::Vector3d::Zero();  // d/d(c, gamma, beta)
  bool ok = true;
};

// Log-likelihood and analytic score of the linear recursion; presample
// X_{-1} = lambda_{-1} = lambda0 with zero sensitivity.
LinearEval eval_linear(double c, double g, double b, const std::vector<double>& x, double lambda0) {
  LinearEval r;
  double lam_prev = lambda0, x_prev = lambda0;
  Eigen::Vector3d d_prev = Eigen::Vector3d::Zero();
  for (double xt : x) {
    const double lam = c + g * x_prev + b * lam_prev;
    const Eigen::Vector3d d = Eigen::Vector3d(1.0, x_prev, lam_prev) + b * d_prev;
    if (!(lam > 0.0)) {
      r.ok = false;
      return r;
    }
    r.loglik += -lam + xt * std::log(lam) - std::lgamma(xt + 1.0);
    r.score += (xt / lam - 1.0) * d;
    lam_prev = lam;
    x_prev = xt;
    d_prev = d;
  }
  return r;
}

}  // namespace

PoissonFit fit_poisson_mle(const std::vector<std::int64_t>& counts, const PoissonFitConfig& cfg) {
  if (static_cast<int>(counts.size()) < std::max(cfg.min_periods, 3)) {
    throw ValidationError("count series has " + std::to_string(counts.size()) +
                          " periods, fewer than the minimum " + std::to_string(cfg.min_periods));
  }
  const std::vector<double> x = as_double(counts);
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  if (mean == 0.0) throw ValidationError("count series is identically zero; intensity not identified");

  PoissonFit fit;
  fit.lambda0 = mean;
  fit.n_obs = static_cast<long>(x.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();

  if (cfg.intercept_only) {
    fit.params.c_bar = mean;
    const auto ev = eval_linear(mean, 0.0, 0.0, x, mean);
    fit.loglik = ev.loglik;
    fit.score = Vector::Zero(3);
    fit.score[0] = ev.score[0] / n;
    fit.std_errors = Vector::Constant(3, nan);
    fit.std_errors[0] = std::sqrt(mean / n);
    fit.grad_norm = std::abs(fit.score[0]);
    fit.converged = true;
    return fit;
  }

  // u = (log c, stick-breaking coordinates of (gamma, beta)).
  Objective objective = [&](const Vector& u, Vector& grad) {
    grad.resize(3);
    const double c = std::exp(u[0]);
    const Vector gb = StickBreaking::forward(u.tail(2));
    const auto ev = eval_linear(c, gb[0], gb[1], x, mean);
    if (!ev.ok || !std::isfinite(ev.loglik)) {
      grad.setConstant(std::numeric_limits<double>::quiet_NaN());
      return std::numeric_limits<double>::infinity();
    }
    grad[0] = -c * ev.score[0] / n;
    grad.tail(2) = -StickBreaking::jacobian(u.tail(2)).transpose() * ev.score.tail(2) / n;
    return -ev.loglik / n;
  };

  BfgsOptions bopt;
  bopt.max_iterations = cfg.max_iterations;
  bopt.grad_tol = cfg.grad_tol;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  BfgsResult best;
  best.f = std::numeric_limits<double>::infinity();
  int usable = 0;
  for (int start = 0; start < std::max(1, cfg.starts); ++start) {
    double g = 0.2, b = 0.5;
    if (start > 0) {
      const double persistence = 0.05 + 0.9 * unif(rng);
      const double share = 0.05 + 0.9 * unif(rng);
      g = persistence * share;
      b = persistence - g;
    }
    Vector u0(3);
    u0[0] = std::log(mean * (1.0 - g - b));
    u0.tail(2) = StickBreaking::inverse(Vector{{g, b}});
    BfgsResult r = minimize_bfgs(objective, u0, bopt);
    if (!std::isfinite(r.f) || !(r.converged || r.grad_norm <= 1e-5)) continue;
    ++usable;
    if (r.f < best.f) best = std::move(r);
  }
  if (usable == 0) throw NoConvergence("every optimizer start failed for the Poisson fit");

  const Vector gb = StickBreaking::forward(best.x.tail(2));
  fit.params.c_bar = std::exp(best.x[0]);
  fit.params.gamma_bar = gb[0];
  fit.params.beta = gb[1];
  fit.iterations = best.iterations;
  fit.grad_norm = best.grad_norm;
  fit.converged = best.converged;

  const Eigen::Vector3d theta(fit.params.c_bar, fit.params.gamma_bar, fit.params.beta);
  const auto at = eval_linear(theta[0], theta[1], theta[2], x, mean);
  fit.loglik = at.loglik;
  fit.score = at.score / n;

  // Observed information by central differences of the analytic score.
  Eigen::Matrix3d info;
  bool info_ok = at.ok;
  for (int j = 0; j < 3 && info_ok; ++j) {
    const double h = 1e-5 * std::max(std::abs(theta[j]), 1e-2);
    Eigen::Vector3d up = theta, dn = theta;
    up[j] += h;
    dn[j] -= h;
    const auto eu = eval_linear(up[0], up[1], up[2], x, mean);
    const auto ed = eval_linear(dn[0], dn[1], dn[2], x, mean);
    info_ok = eu.ok && ed.ok;
    info.col(j) = -(eu.score - ed.score) / (2.0 * h);
  }
  fit.std_errors = Vector::Constant(3, nan);
  if (info_ok) {
    const Eigen::Matrix3d sym = 0.5 * (info + info.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(sym, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() > 0.0) {
      fit.std_errors = sym.inverse().diagonal().cwiseSqrt();
    }
  }
  return fit;
}

CountSeries simulate_poisson_ar(const PoissonParams& params, int horizon, std::uint64_t seed, int burn_in,
                                std::uint32_t replicate) {
  validate_poisson(params);
  if (horizon < 0 || burn_in < 0) throw ValidationError("horizon and burn-in must be nonnegative");
  const int s = lag_count(params);
  const double start = params.stationary_mean();
  const CellUniforms uniforms(seed, replicate, StreamDomain::Count);

  const auto total = static_cast<std::size_t>(burn_in) + static_cast<std::size_t>(horizon);
  std::vector<double> xs(static_cast<std::size_t>(s), start), ls(static_cast<std::size_t>(s), start);
  xs.reserve(total + xs.size());
  ls.reserve(total + ls.size());
  CountSeries out;
  out.lambda0 = start;
  for (std::size_t t = 0; t < total; ++t) {
    const std::size_t end = xs.size();
    const double lam = step(
        params, [&](int j) { return xs[end - 1 - static_cast<std::size_t>(j)]; },
        [&](int j) { return ls[end - static_cast<std::size_t>(j)]; });
    if (!(lam >= 0.0) || lam > 700.0) {
      throw DomainError("intensity " + std::to_string(lam) + " outside the sampler's range");
    }
    // Inversion of the Poisson CDF.
    const double u = uniforms(static_cast<std::uint32_t>(t), 0);
    double pk = std::exp(-lam), cdf = pk;
    std::int64_t k = 0;
    const double kmax = lam + 40.0 * std::sqrt(lam) + 100.0;
    while (u > cdf && k < kmax) {
      ++k;
      pk *= lam / static_cast<double>(k);
      cdf += pk;
    }
    xs.push_back(static_cast<double>(k));
    ls.push_back(lam);
    if (t >= static_cast<std::size_t>(burn_in)) {
      out.x.push_back(k);
      out.lambda.push_back(lam);
    }
  }
  return out;
}

ModelSpec calibrate_binary_from_poisson(const PoissonParams& params, int n_series) {
  if (n_series < 1) throw ValidationError("number of series must be at least 1");
  validate_poisson(params);
  const double omega = params.c_bar / n_series;
  if (omega + params.gamma_bar + params.beta > 1.0 + 1e-12) {
    throw ValidationError("calibrated coefficients sum to " +
                          std::to_string(omega + params.gamma_bar + params.beta) +
                          " > 1; probabilities would leave [0, 1]");
  }
  ModelSpec spec = make_interactive(omega, 0.0, params.gamma_bar, params.beta, n_series);
  validate_spec(spec).require();
  return spec;
}

}  // namespace gab
