#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
/// N x T panel of 0/1 outcomes, column t holds the cross-section at time t.
using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

enum class Family {
  LinearUnivariate,
  LinearMultiLag,
  Logit11,
  NonlinearScalar,
  Exchangeable,
  Interactive,
  Network,
  NonlinearInteractive,
};

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

/// s = number of probability lags, q = number of outcome lags.
struct Lags {
  int s = 1;
  int q = 1;
  int max() const { return s > q ? s : q; }
};

/// Coefficients of one series. `alpha` multiplies outcome lags (size q), `beta`
/// multiplies probability lags (size s). `gamma` weights the cross-sectional
/// (Interactive, Exchangeable) or network (Network) average of past outcomes.
struct SeriesCoefficients {
  double omega = 0.0;
  std::vector<double> alpha;
  std::vector<double> beta;
  double gamma = 0.0;
};

/// Fixed catalog for the NonlinearScalar family p_t = omega + alpha*y + f(p).
enum class ScalarNonlinearity {
  CubicWeak,    ///< f(p) = 2 p (p - 1/2)^2
  CubicStrong,  ///< f(p) = (p + 0.7) (p - 5/6)^2
};

std::string_view to_string(ScalarNonlinearity f);
ScalarNonlinearity scalar_nonlinearity_from_string(std::string_view name);
double scalar_f(ScalarNonlinearity f, double p);
/// sup |f'(p)| over [0,1], derived analytically for each catalog entry.
double scalar_f_lipschitz(ScalarNonlinearity f);

/// Own-outcome term f_alpha,i, scaled by a_i / N^kappa.
enum class OwnTerm {
  Linear,   ///< y_{i,t-1}
  Product,  ///< y_{i,t-1} y_{i,t-2}, needs two outcome lags
};

/// Local interaction term f_gamma,i evaluated on cross-sectional averages of
/// y_{t-1} and p_{t-1}. Each entry is C^2, vanishes at the origin, and has
/// gradient (local_y_i, local_p_i) there.
enum class LocalTerm {
  Zero,
  Linear,  ///< u_i * ybar + v_i * pbar
  Tanh,    ///< u_i * tanh(ybar) + v_i * tanh(pbar)
};

/// Aggregate term f_gamma evaluated on the count X_{t-1}, scaled by gamma_i / N.
enum class AggregateTerm {
  Zero,
  Identity,    ///< X (continuously differentiable, bounded Jacobian)
  Saturating,  ///< X / (1 + X) (bounded and smooth)
  Capped,      ///< min(X, cap) (bounded, continuous, not differentiable)
};

std::string_view to_string(OwnTerm f);
std::string_view to_string(LocalTerm f);
std::string_view to_string(AggregateTerm f);
OwnTerm own_term_from_string(std::string_view name);
LocalTerm local_term_from_string(std::string_view name);
AggregateTerm aggregate_term_from_string(std::string_view name);

double local_term_value(LocalTerm f, double weight_y, double weight_p, double ybar, double pbar);
double aggregate_term_value(AggregateTerm f, double count, double cap);

/// Parameter block of the nonlinear interactive family:
///   p_{i,t} = c_i/N + N^{-kappa} a_i f_alpha(y_i lags) + sum_tau beta_tau p_{i,t-tau}
///           + f_gamma,i(ybar_{t-1}, pbar_{t-1}) + (gamma_i/N) f_gamma(X_{t-1}).
struct InteractiveNonlinearity {
  double kappa = 1.0;
  std::vector<double> c;
  std::vector<double> a;
  std::vector<double> local_y;
  std::vector<double> local_p;
  std::vector<double> gamma;
  std::vector<double> beta_lags;
  OwnTerm own = OwnTerm::Linear;
  LocalTerm local = LocalTerm::Linear;
  AggregateTerm aggregate = AggregateTerm::Identity;
  double cap = 5.0;
};

struct ModelSpec {
  Family family = Family::LinearUnivariate;
  int n_series = 1;
  Lags lags;
  /// One block per series. For Exchangeable all blocks are identical.
  std::vector<SeriesCoefficients> series;
  std::optional<ScalarNonlinearity> scalar_nonlinearity;
  std::optional<InteractiveNonlinearity> interactive_nonlinearity;
  /// Row-stochastic N x N weight matrix (Network family only).
  std::optional<SparseRowMatrix> network;
};

// Factories for the common families. Scalars broadcast to every series.
ModelSpec make_linear(double omega, double alpha, double beta, int n_series = 1);
ModelSpec make_linear_multilag(double omega, std::vector<double> alpha, std::vector<double> beta,
                               int n_series = 1);
ModelSpec make_logit(double omega, double alpha, double beta, int n_series = 1);
ModelSpec make_nonlinear_scalar(double omega, double alpha, ScalarNonlinearity f, int n_series = 1);
ModelSpec make_exchangeable(double omega, double gamma, double beta, int n_series);
ModelSpec make_interactive(std::span<const double> omega, std::span<const double> alpha,
                           std::span<const double> gamma, std::span<const double> beta);
ModelSpec make_interactive(double omega, double alpha, double gamma, double beta, int n_series);
ModelSpec make_network(std::span<const double> omega, std::span<const double> alpha,
                       std::span<const double> gamma, std::span<const double> beta,
                       SparseRowMatrix weights);
/// s = block.beta_lags.size(); q = 2 when the own term is Product, else 1.
ModelSpec make_nonlinear_interactive(InteractiveNonlinearity block, int n_series);

SparseRowMatrix to_sparse(const Matrix& dense);

struct ValidationCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const;
  /// Failed checks joined as "name: detail; ...".
  std::string summary() const;
  /// Throws ValidationError listing the failed checks.
  void require() const;
};

ValidationReport validate_spec(const ModelSpec& spec);

/// Ring of the last s probability vectors and last q outcome vectors.
class PanelState {
 public:
  PanelState(int n_series, int p_lags, int y_lags);

  int n_series() const { return n_; }
  int p_lags() const { return s_; }
  int y_lags() const { return q_; }

  /// tau = 1 is the most recent entry.
  std::span<const double> p_lag(int tau) const;
  std::span<const std::uint8_t> y_lag(int tau) const;

  /// Makes (p, y) the most recent entry, dropping the oldest.
  void push(std::span<const double> p, std::span<const std::uint8_t> y);
  /// Fills every probability lag with `p` and every outcome lag with `y`.
  void fill(std::span<const double> p, std::span<const std::uint8_t> y);
  void set_p_lag(int tau, std::span<const double> p);
  void set_y_lag(int tau, std::span<const std::uint8_t> y);

 private:
  int slot(int head, int tau, int len) const { return (head + tau - 1) % len; }

  int n_;
  int s_;
  int q_;
  int p_head_ = 0;
  int y_head_ = 0;
  std::vector<double> p_;
  std::vector<std::uint8_t> y_;
};

/// State ring sized for `spec` (s probability lags, q outcome lags).
PanelState make_state(const ModelSpec& spec);

/// p_t = g(p_{t-1..t-s}, y_{t-1..t-q}). Throws DomainError if a value leaves [0,1]
/// by more than rounding.
void eval_g(const ModelSpec& spec, const PanelState& state, std::span<double> out);
std::vector<double> eval_g(const ModelSpec& spec, const PanelState& state);

enum class MeanMethod { ClosedForm, LinearSolve };

struct MeanReport {
  Vector per_series_mean;
  double total_mean = 0.0;
  MeanMethod method = MeanMethod::ClosedForm;
};

/// Stationary E[y_i] = E[p_i]. Throws DegenerateMean when the stationarity
/// denominators are not positive, ValidationError for families without a mean formula.
MeanReport unconditional_mean(const ModelSpec& spec);

/// Stable 64-bit hash of the canonical JSON form of the spec.
std::uint64_t spec_hash(const ModelSpec& spec);

}  // namespace gab
