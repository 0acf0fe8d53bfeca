#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "gab/model.hpp"
#include "gab/rng.hpp"

namespace gab {

/// Explicit initial condition. `p[k]` is p_{-k} (k = 0 is the most recent) and
/// there must be s of them; a single vector is repeated for every lag and a
/// length-1 vector is broadcast across series. Outcome lags not given in `y`
/// are drawn as I(u <= p) from an independent stream; when q > s the oldest
/// probability vector is reused for the extra lags.
struct FixedInit {
  std::vector<std::vector<double>> p;
  std::vector<std::vector<std::uint8_t>> y;
};

/// Start every probability lag at the unconditional mean (0.5 when the family
/// has no mean formula) and discard burn_in + extra steps.
struct StationaryWarmup {
  int extra = 0;
};

using InitPolicy = std::variant<FixedInit, StationaryWarmup>;

FixedInit fixed_init(double p0);

struct SimConfig {
  std::uint64_t seed = 0;
  int horizon = 1;
  int burn_in = 1000;
  InitPolicy init = StationaryWarmup{};
  int threads = 1;
};

/// N x T panels; column t is the cross-section at output time t.
struct Trajectory {
  Matrix p;
  BinaryMatrix y;
  std::uint64_t seed = 0;
  std::uint32_t replicate = 0;
  std::uint64_t spec_hash = 0;
};

/// Step-by-step simulator. Construction performs the burn-in; every call to
/// step() produces the next output time. Shocks are u_{i,t} from the Philox
/// stream keyed by (seed, absolute step, i, replicate).
class Simulator {
 public:
  Simulator(const ModelSpec& spec, const SimConfig& cfg, std::uint32_t replicate = 0);

  void step();
  std::span<const double> p() const { return p_; }
  std::span<const std::uint8_t> y() const { return y_; }
  /// Output time of the last step (-1 before the first call).
  long t() const { return static_cast<long>(abs_t_) - static_cast<long>(discard_) - 1; }
  const PanelState& state() const { return state_; }
  const ModelSpec& spec() const { return *spec_; }

 private:
  const ModelSpec* spec_;
  PanelState state_;
  CellUniforms shocks_;
  std::uint32_t abs_t_ = 0;
  std::uint32_t discard_ = 0;
  std::vector<double> p_;
  std::vector<double> u_;
  std::vector<std::uint8_t> y_;
};

/// Builds the initial PanelState for `init`, drawing supplemental outcome lags
/// from the InitialOutcome stream.
PanelState initial_state(const ModelSpec& spec, const InitPolicy& init, std::uint64_t seed,
                         std::uint32_t replicate);

Trajectory simulate(const ModelSpec& spec, const SimConfig& cfg, std::uint32_t replicate = 0);

struct CouplingTrace {
  /// mean over replications of sum_i |p_{i,t} - p'_{i,t}|, t = 0..T-1.
  std::vector<double> mean_distance;
  /// OLS fit log(distance) = intercept + slope * t over points with distance > 1e-12.
  double slope = 0.0;
  double intercept = 0.0;
  int fit_points = 0;
  int replications = 0;
};

/// Runs two trajectories from init_a and init_b on identical shocks (no
/// burn-in: the trace starts at the initial condition).
CouplingTrace coupled_simulate(const ModelSpec& spec, const InitPolicy& init_a,
                               const InitPolicy& init_b, const SimConfig& cfg, int reps);

/// Least-squares fit of log(d_t) on t over entries with d_t > threshold.
/// Returns {slope, intercept, points}.
struct LogLinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};
LogLinearFit fit_log_decay(std::span<const double> distance, double threshold = 1e-12);

/// X_t = sum_i y_{i,t} with an optional attached intensity path.
struct CountSeries {
  std::vector<std::int64_t> x;
  std::vector<double> lambda;
  std::optional<double> lambda0;
};

CountSeries aggregate_counts(const BinaryMatrix& y);
CountSeries aggregate_counts(const Trajectory& traj);

enum class CovarianceSolver { Auto, Direct, FixedPoint };

/// Stationary covariance Omega of p_t for the Interactive family, solving
/// Omega = Phi Omega Phi' + Pi diag(mu_i (1 - mu_i) - Omega_ii) Pi' with
/// Phi = diag(alpha + beta) + gamma 1'/N and Pi = diag(alpha) + gamma 1'/N.
/// Direct: dense Kronecker-form linear system (N^2 unknowns, small N only).
/// FixedPoint: O(N^2) per sweep using the rank-one structure of Phi and Pi.
Matrix stationary_covariance(const ModelSpec& spec, CovarianceSolver solver = CovarianceSolver::Auto);

struct StationaryMoments {
  double exact_mean_sum_p = 0.0;
  double exact_var_sum_p = 0.0;
  double mc_mean_sum_p = 0.0;
  double mc_var_sum_p = 0.0;
  double mc_max_p = 0.0;
  /// Standard error of mc_mean_sum_p from batch means.
  double mc_mean_se = 0.0;
  long samples = 0;
};

/// Exact finite-N moments of sum_i p_{i,t} plus Monte Carlo estimates from
/// `reps` stationary runs of cfg.horizon steps.
StationaryMoments stationary_moments(const ModelSpec& spec, const SimConfig& cfg, int reps = 1);

}  // namespace gab
