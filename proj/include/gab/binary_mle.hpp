#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gab/model.hpp"

namespace gab {

/// Parameters held at zero during estimation.
enum class Restriction {
  None,
  ZeroAlpha,     ///< drop the own-outcome coefficients
  ConstantOnly,  ///< p_{i,t} = omega_i
};

std::string_view to_string(Restriction r);
Restriction restriction_from_string(std::string_view name);

/// Initial probability used before the first filtered value. SampleMean uses
/// the per-series mean of y over the supplied panel (the Exchangeable family
/// pools all series); the initial value carries no parameter sensitivity.
struct ProbabilityInit {
  enum class Kind { SampleMean, Fixed } kind = Kind::SampleMean;
  double value = 0.5;
};

struct LikelihoodOptions {
  /// Probabilities are clipped to [floor, 1 - floor] inside log().
  double floor = 1e-10;
  ProbabilityInit init;
  Restriction restriction = Restriction::None;
};

/// Flat parameter layout for a family. Blocks are estimated on the simplex
/// {theta >= 0, sum <= 1} (linear families) or unconstrained (Logit11):
///   Linear*:      per series [omega, alpha_1..alpha_q, beta_1..beta_s]
///   Logit11:      per series [omega, alpha, beta]
///   Exchangeable: one block  [omega, gamma, beta]
///   Interactive, Network: per series [omega, alpha, gamma, beta]
/// Restricted coefficients are removed from the blocks.
struct ParamLayout {
  Family family = Family::LinearUnivariate;
  int n_series = 1;
  Lags lags;
  Restriction restriction = Restriction::None;
  int blocks = 1;
  int block_size = 1;
  bool simplex = true;
  std::vector<std::string> labels;
  int size() const { return blocks * block_size; }
};

ParamLayout make_layout(const ModelSpec& prototype, Restriction restriction = Restriction::None);

/// Coefficients of `spec` in layout order.
Vector pack(const ModelSpec& spec, const ParamLayout& layout);
/// Spec with the coefficients theta; network and lag orders come from `prototype`.
ModelSpec unpack(const Vector& theta, const ParamLayout& layout, const ModelSpec& prototype);

struct LikelihoodResult {
  double loglik = 0.0;
  Vector score;
  /// (1/T_eff) sum_t sum_i (dg)(dg)' / (g (1 - g)).
  Matrix fisher;
  /// (1/T_eff) sum_t s_t s_t' with s_t the score contribution of period t.
  Matrix opg;
  long t_eff = 0;
  long n_obs = 0;
  long clip_count = 0;
};

struct LikelihoodNeeds {
  bool score = true;
  bool fisher = false;
  bool opg = false;
};

/// Log-likelihood of the N x T panel `y` under `spec` with the probability path
/// filtered recursively; derivatives by forward sensitivity recursion. The
/// first L periods condition the recursion, L = number of outcome lags that
/// enter the active parameters (1 when the aggregate regressor is present).
LikelihoodResult evaluate_likelihood(const ModelSpec& spec, const BinaryMatrix& y,
                                     const LikelihoodOptions& options = {},
                                     LikelihoodNeeds needs = {});

double loglik(const ModelSpec& spec, const BinaryMatrix& y, const LikelihoodOptions& options = {});
Vector score(const ModelSpec& spec, const BinaryMatrix& y, const LikelihoodOptions& options = {});
/// Throws SingularInformation when the smallest eigenvalue is below 1e-12.
Matrix fisher_info(const ModelSpec& spec, const BinaryMatrix& y, const LikelihoodOptions& options = {});

struct FitConfig {
  Restriction restriction = Restriction::None;
  int starts = 5;
  std::uint64_t seed = 0;
  int max_iterations = 500;
  double grad_tol = 1e-7;
  /// Fit per-series blocks independently (Linear, Logit11, Interactive, Network).
  bool separable = true;
  int threads = 1;
  int min_periods = 10;
  LikelihoodOptions likelihood;
};

struct FitResult {
  ModelSpec spec;
  ParamLayout layout;
  Vector theta;
  double loglik = 0.0;
  Matrix fisher;
  Vector std_errors;
  bool fisher_ok = false;
  std::string fisher_message;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  long clip_count = 0;
  long t_eff = 0;
  int starts_ok = 0;
};

/// Maximum likelihood by BFGS in stick-breaking coordinates with multi-start
/// (one moment-based start plus seeded random starts); keeps the best start.
/// Family, N, lags and network are taken from `prototype`.
FitResult fit_mle(const ModelSpec& prototype, const BinaryMatrix& y, const FitConfig& config = {});

/// Filtered probabilities: column t is g evaluated on realized outcomes up to
/// t-1 and filtered probabilities, started at `p_init` (per series) for the
/// first max(s, q) periods.
Matrix filter_probabilities(const ModelSpec& spec, const BinaryMatrix& y, const Vector& p_init);

/// One-step-ahead forecasts for columns [start, T) of `y`, rolling the filter
/// forward on realized outcomes. The filter starts at the per-series mean of
/// y over [0, start) (all of y when start = 0).
Matrix forecast_one_step(const ModelSpec& fitted, const BinaryMatrix& y, int start);
Matrix forecast_one_step(const FitResult& fitted, const BinaryMatrix& y, int start);

/// Constant forecast.
Matrix forecast_constant(const BinaryMatrix& y, int start, double value);
/// Persistence forecast: y_{i,t-1}.
Matrix forecast_persistence(const BinaryMatrix& y, int start);

struct MseReport {
  Vector per_series;
  double pooled = 0.0;
};

MseReport mse_eval(const Matrix& forecasts, const BinaryMatrix& realized);

}  // namespace gab
