#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gab/model.hpp"
#include "gab/simulate.hpp"

namespace gab {

/// Rare-event scaling: omega_i = c_i / N, alpha_i = a_i / N^kappa, beta_i = beta,
/// gamma_i as given. With heterogeneity h > 0 the per-series values are
/// c * (1 + h z_i), z_i ~ U[-1, 1] drawn from `seed` (likewise for a and gamma).
struct RareEventScaling {
  std::vector<int> n_grid{50, 200, 800};
  double kappa = 1.0;
  double c = 0.25;
  double a = 0.5;
  double beta = 0.6;
  double gamma = 0.2;
  double heterogeneity = 0.0;
  /// When false gamma_i = gamma for every series even with heterogeneity > 0.
  bool heterogeneous_gamma = true;
  /// Upper bound C on c_i and a_i.
  double bound = 10.0;
  std::uint64_t seed = 0;
};

ModelSpec make_rare_event_spec(const RareEventScaling& scaling, int n);

struct Feasibility {
  int n = 0;
  bool feasible = false;
  std::string detail;
};
std::vector<Feasibility> rare_event_feasibility(const RareEventScaling& scaling);

/// Parameters (c_bar, gamma_bar, beta) of the limiting intensity recursion at size N.
struct LimitParameters {
  double c_bar = 0.0;
  double gamma_bar = 0.0;
  double beta = 0.0;
  double mean() const { return c_bar / (1.0 - beta - gamma_bar); }
  /// Limit of Var(sum_i p_{i,t}).
  double variance() const;
};
LimitParameters limit_parameters(const ModelSpec& spec);

/// Exact PMF of a sum of independent Bernoulli(q_i), by sequential convolution.
std::vector<double> bernoulli_sum_pmf(std::span<const double> q);
/// Same recursion restricted to k <= max_k (entries are exact, the mass above
/// max_k is dropped).
std::vector<double> bernoulli_sum_pmf(std::span<const double> q, int max_k);

/// Poisson(lambda) PMF on 0..max_k.
std::vector<double> poisson_pmf(double lambda, int max_k);

/// Total variation between PoissonBinomial(q) and Poisson(sum q). The Poisson
/// support is enumerated until its CDF reaches 1 - 1e-12 (and at least up to N);
/// the remaining Poisson tail enters as one exact term.
double poisson_tv_distance(std::span<const double> q);

/// Same distance with the Poisson-binomial PMF computed only up to a
/// lambda-dependent cutoff; mass beyond the cutoff on either side is added in
/// full, so the result is an upper bound that is exact to ~1e-12.
double poisson_tv_distance_truncated(std::span<const double> q);

struct ExperimentConfig {
  int horizon = 2000;
  int burn_in = 1000;
  int reps = 200;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Exact per-t TV is evaluated every `tv_stride` steps.
  int tv_stride = 10;
  int pit_bins = 10;
  /// Also solve the exact finite-N covariance equation (Interactive only).
  bool exact_moments = true;
};

struct LimitDiagnostics {
  int n = 0;
  int degree = 0;  ///< network degree (0 for the complete-graph interactive model)
  /// mean over sampled (rep, t) of TV(PoissonBinomial(p_t), Poisson(sum p_t)).
  double tv_mean = 0.0;
  /// TV between the pooled histogram of X_t and the pooled Poisson(sum p_t) mixture.
  double tv_pooled = 0.0;
  double mean_x = 0.0;
  double mean_x_se = 0.0;
  double mean_sum_p = 0.0;
  double var_sum_p = 0.0;
  /// sum (X_t - sum p_t)^2 / sum sum p_t: conditional variance-to-mean ratio.
  double dispersion_ratio = 0.0;
  /// max_j |J * h_j - 1| of the J-bin nonrandomized PIT histogram under the
  /// co-filtered intensity recursion.
  double pit_deviation = 0.0;
  /// mean |lambda_t - sum_i p_{i,t}|.
  double lambda_gap = 0.0;
  double max_p = 0.0;
  double limit_mean = 0.0;
  double limit_var = 0.0;
  /// Exact finite-N values from the covariance equation (NaN when not computed).
  double exact_mean_sum_p = 0.0;
  double exact_var_sum_p = 0.0;
  long samples = 0;
};

/// Simulates `spec` (Interactive or Network) and computes the diagnostics above.
LimitDiagnostics diagnose_limit(const ModelSpec& spec, const ExperimentConfig& cfg);

std::vector<LimitDiagnostics> run_limit_experiment(const RareEventScaling& scaling,
                                                   const ExperimentConfig& cfg);

/// Circulant d-regular matrix: W_ij = 1/d for j in {i, i+1, ..., i+d-1} mod N.
SparseRowMatrix build_regular_network(int n, int d);

/// d(N) = ceil(multiplier * log N), capped at N.
int network_degree(int n, double multiplier);

struct NetworkComparison {
  LimitDiagnostics complete;
  LimitDiagnostics network;
  double rel_diff_mean_x = 0.0;
  double rel_diff_var_sum_p = 0.0;
};

/// For each N, runs the complete-graph model and the d(N)-regular network model
/// (homogeneous gamma) on common random numbers.
std::vector<NetworkComparison> run_network_limit_experiment(const RareEventScaling& scaling,
                                                            double degree_multiplier,
                                                            const ExperimentConfig& cfg);

ModelSpec make_rare_event_network_spec(const RareEventScaling& scaling, int n, int degree);

}  // namespace gab
