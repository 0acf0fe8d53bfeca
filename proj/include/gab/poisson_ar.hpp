#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gab/model.hpp"
#include "gab/simulate.hpp"

namespace gab {

/// Extra lags and curvature for the general intensity recursion
///   lambda_t = c + sum_tau beta_tau lambda_{t-tau}
///            + sum_tau (weight_x_tau X_{t-tau} + weight_lambda_tau lambda_{t-tau})
///            + gamma_bar * f(X_{t-1})
/// with f taken from the aggregate-term catalog.
struct PoissonNonlinear {
  std::vector<double> beta;           ///< size s
  std::vector<double> weight_x;       ///< size s
  std::vector<double> weight_lambda;  ///< size s
  AggregateTerm term = AggregateTerm::Identity;
  double cap = 5.0;
  int lags() const { return static_cast<int>(beta.size()); }
};

/// lambda_t = c_bar + gamma_bar X_{t-1} + beta lambda_{t-1}.
struct PoissonParams {
  double c_bar = 0.0;
  double gamma_bar = 0.0;
  double beta = 0.0;
  std::optional<PoissonNonlinear> nonlinear;

  /// c_bar / (1 - gamma_bar - beta); throws DegenerateMean when the sum reaches 1.
  double stationary_mean() const;
};

/// Throws ValidationError on negative or non-finite coefficients.
void validate_poisson(const PoissonParams& params);

/// out[k] = c + gamma X[k] + beta out[k-1] with out[-1] = lambda0, so out[k]
/// is the intensity of the count following X[k].
std::vector<double> filter_lambda(const PoissonParams& params, const std::vector<std::int64_t>& x,
                                  double lambda0);

/// General recursion with s presample values of X and lambda (most recent
/// last). Output has one entry per element of `x`, aligned as in filter_lambda.
std::vector<double> filter_lambda_general(const PoissonParams& params,
                                          const std::vector<std::int64_t>& x,
                                          const std::vector<double>& x_presample,
                                          const std::vector<double>& lambda_presample);

/// Intensities of X[0..T) given presample X_{-1} = x_pre and lambda_{-1} = lambda_pre.
std::vector<double> intensity_path(const PoissonParams& params, const std::vector<std::int64_t>& x,
                                   double lambda_pre, double x_pre);

struct PoissonLoglik {
  double value = 0.0;
  /// Set when some lambda_t = 0 has X_t > 0; value is then -infinity.
  bool zero_intensity = false;
};

/// sum_t [-lambda_t + X_t log lambda_t - log X_t!].
PoissonLoglik poisson_loglik(const std::vector<std::int64_t>& x, const std::vector<double>& lambda);
/// Log-likelihood with the intensity filtered from lambda0 (also used as X_{-1}).
PoissonLoglik poisson_loglik(const PoissonParams& params, const std::vector<std::int64_t>& x,
                             double lambda0);

struct PoissonFitConfig {
  /// Fit c_bar only (gamma_bar = beta = 0).
  bool intercept_only = false;
  int starts = 5;
  std::uint64_t seed = 0;
  int max_iterations = 500;
  double grad_tol = 1e-8;
  int min_periods = 10;
};

struct PoissonFit {
  PoissonParams params;
  /// (c_bar, gamma_bar, beta); NaN for coefficients held fixed or when the
  /// observed information is singular.
  Vector std_errors;
  double loglik = 0.0;
  double lambda0 = 0.0;
  Vector score;  ///< in (c_bar, gamma_bar, beta), per observation
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  long n_obs = 0;
};

/// Poisson MLE with lambda0 = X_{-1} = sample mean of X. c_bar = exp(u0),
/// (gamma_bar, beta) by stick-breaking so that gamma_bar + beta < 1.
PoissonFit fit_poisson_mle(const std::vector<std::int64_t>& x, const PoissonFitConfig& config = {});

/// Linear Poisson autoregression started at the stationary mean. Counts are
/// drawn by CDF inversion of the Count stream.
CountSeries simulate_poisson_ar(const PoissonParams& params, int horizon, std::uint64_t seed,
                                int burn_in = 1000, std::uint32_t replicate = 0);

/// Homogeneous Interactive spec with omega = c_bar / N, alpha = 0,
/// gamma = gamma_bar, beta = beta.
ModelSpec calibrate_binary_from_poisson(const PoissonParams& params, int n_series);

}  // namespace gab
