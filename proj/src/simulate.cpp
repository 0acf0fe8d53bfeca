#include "gab/simulate.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

#include "gab/errors.hpp"
#include "gab/parallel.hpp"
#include "gab/spec_io.hpp"

namespace gab {

namespace {

std::vector<double> broadcast(const std::vector<double>& v, int n, const char* what) {
  if (static_cast<int>(v.size()) == n) return v;
  if (v.size() == 1) return std::vector<double>(static_cast<std::size_t>(n), v[0]);
  throw ShapeMismatch(std::string(what) + " has " + std::to_string(v.size()) +
                      " entries, expected 1 or " + std::to_string(n));
}

std::vector<double> warmup_start(const ModelSpec& spec) {
  const auto n = static_cast<std::size_t>(spec.n_series);
  try {
    const auto mean = unconditional_mean(spec);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = std::clamp(mean.per_series_mean[static_cast<Eigen::Index>(i)], 0.0, 1.0);
    }
    return out;
  } catch (const ValidationError&) {
  } catch (const DegenerateMean&) {
  }
  return std::vector<double>(n, 0.5);
}

}  // namespace

FixedInit fixed_init(double p0) { return FixedInit{{{p0}}, {}}; }

PanelState initial_state(const ModelSpec& spec, const InitPolicy& init, std::uint64_t seed,
                         std::uint32_t replicate) {
  const int n = spec.n_series;
  const int s = spec.lags.s;
  const int q = spec.lags.q;
  PanelState state = make_state(spec);

  std::vector<std::vector<double>> p_lags;
  const FixedInit* fixed = std::get_if<FixedInit>(&init);
  if (fixed) {
    if (fixed->p.empty()) throw ValidationError("fixed initial condition needs probability vectors");
    if (fixed->p.size() != 1 && static_cast<int>(fixed->p.size()) != s) {
      throw ShapeMismatch("fixed initial condition needs 1 or s = " + std::to_string(s) +
                          " probability vectors");
    }
    for (int tau = 1; tau <= s; ++tau) {
      const auto& src = fixed->p.size() == 1 ? fixed->p[0] : fixed->p[static_cast<std::size_t>(tau - 1)];
      p_lags.push_back(broadcast(src, n, "initial probability vector"));
    }
  } else {
    p_lags.assign(static_cast<std::size_t>(s), warmup_start(spec));
  }
  for (int tau = 1; tau <= s; ++tau) state.set_p_lag(tau, p_lags[static_cast<std::size_t>(tau - 1)]);

  if (fixed && !fixed->y.empty()) {
    if (fixed->y.size() != 1 && static_cast<int>(fixed->y.size()) != q) {
      throw ShapeMismatch("fixed initial condition needs 1 or q = " + std::to_string(q) +
                          " outcome vectors");
    }
    for (int tau = 1; tau <= q; ++tau) {
      const auto& src = fixed->y.size() == 1 ? fixed->y[0] : fixed->y[static_cast<std::size_t>(tau - 1)];
      if (static_cast<int>(src.size()) == n) {
        state.set_y_lag(tau, src);
      } else if (src.size() == 1) {
        state.set_y_lag(tau, std::vector<std::uint8_t>(static_cast<std::size_t>(n), src[0]));
      } else {
        throw ShapeMismatch("initial outcome vector has wrong length");
      }
    }
    return state;
  }

  // Supplemental outcome lags y_{1-tau} = I(u <= p_{1-tau}) on their own stream.
  const CellUniforms draws(seed, replicate, StreamDomain::InitialOutcome);
  std::vector<std::uint8_t> y(static_cast<std::size_t>(n));
  for (int tau = 1; tau <= q; ++tau) {
    const auto& p = p_lags[static_cast<std::size_t>(std::min(tau, s) - 1)];
    for (int i = 0; i < n; ++i) {
      const double u = draws(static_cast<std::uint32_t>(tau - 1), static_cast<std::uint32_t>(i));
      y[static_cast<std::size_t>(i)] = u <= p[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    state.set_y_lag(tau, y);
  }
  return state;
}

Simulator::Simulator(const ModelSpec& spec, const SimConfig& cfg, std::uint32_t replicate)
    : spec_(&spec),
      state_((validate_spec(spec).require(), initial_state(spec, cfg.init, cfg.seed, replicate))),
      shocks_(cfg.seed, replicate, StreamDomain::Shock),
      p_(static_cast<std::size_t>(spec.n_series)),
      u_(static_cast<std::size_t>(spec.n_series)),
      y_(static_cast<std::size_t>(spec.n_series)) {
  if (cfg.burn_in < 0) throw ValidationError("burn_in must be nonnegative");
  long discard = cfg.burn_in;
  if (const auto* w = std::get_if<StationaryWarmup>(&cfg.init)) {
    if (w->extra < 0) throw ValidationError("warmup extra steps must be nonnegative");
    discard += w->extra;
  }
  discard_ = static_cast<std::uint32_t>(discard);
  for (std::uint32_t k = 0; k < discard_; ++k) step();
}

void Simulator::step() {
  eval_g(*spec_, state_, p_);
  const auto n = static_cast<std::uint32_t>(spec_->n_series);
  shocks_.fill(abs_t_, n, u_);
  for (std::uint32_t i = 0; i < n; ++i) y_[i] = u_[i] <= p_[i] ? 1 : 0;
  state_.push(p_, y_);
  ++abs_t_;
}

Trajectory simulate(const ModelSpec& spec, const SimConfig& cfg, std::uint32_t replicate) {
  if (cfg.horizon < 1) throw ValidationError("horizon must be >= 1");
  Simulator sim(spec, cfg, replicate);
  Trajectory traj;
  const int n = spec.n_series;
  traj.p.resize(n, cfg.horizon);
  traj.y.resize(n, cfg.horizon);
  for (int t = 0; t < cfg.horizon; ++t) {
    sim.step();
    for (int i = 0; i < n; ++i) {
      traj.p(i, t) = sim.p()[static_cast<std::size_t>(i)];
      traj.y(i, t) = sim.y()[static_cast<std::size_t>(i)];
    }
  }
  traj.seed = cfg.seed;
  traj.replicate = replicate;
  traj.spec_hash = spec_hash(spec);
  return traj;
}

LogLinearFit fit_log_decay(std::span<const double> distance, double threshold) {
  double st = 0, sl = 0, stt = 0, stl = 0;
  int m = 0;
  for (std::size_t t = 0; t < distance.size(); ++t) {
    if (!(distance[t] > threshold)) continue;
    const double x = static_cast<double>(t);
    const double l = std::log(distance[t]);
    st += x;
    sl += l;
    stt += x * x;
    stl += x * l;
    ++m;
  }
  LogLinearFit fit;
  fit.points = m;
  if (m < 2) return fit;
  const double denom = m * stt - st * st;
  fit.slope = (m * stl - st * sl) / denom;
  fit.intercept = (sl - fit.slope * st) / m;
  return fit;
}

CouplingTrace coupled_simulate(const ModelSpec& spec, const InitPolicy& init_a,
                               const InitPolicy& init_b, const SimConfig& cfg, int reps) {
  if (reps < 1) throw ValidationError("coupling needs at least one replication");
  if (cfg.horizon < 1) throw ValidationError("horizon must be >= 1");
  validate_spec(spec).require();
  const auto horizon = static_cast<std::size_t>(cfg.horizon);
  std::vector<std::vector<double>> per_rep(static_cast<std::size_t>(reps));

  parallel_for(static_cast<std::size_t>(reps), cfg.threads, [&](std::size_t r) {
    SimConfig ca = cfg;
    ca.burn_in = 0;
    ca.init = init_a;
    SimConfig cb = ca;
    cb.init = init_b;
    Simulator a(spec, ca, static_cast<std::uint32_t>(r));
    Simulator b(spec, cb, static_cast<std::uint32_t>(r));
    auto& d = per_rep[r];
    d.resize(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      a.step();
      b.step();
      double dist = 0.0;
      for (std::size_t i = 0; i < a.p().size(); ++i) dist += std::abs(a.p()[i] - b.p()[i]);
      d[t] = dist;
    }
  });

  CouplingTrace trace;
  trace.replications = reps;
  trace.mean_distance.assign(horizon, 0.0);
  for (const auto& d : per_rep) {
    for (std::size_t t = 0; t < horizon; ++t) trace.mean_distance[t] += d[t];
  }
  for (double& v : trace.mean_distance) v /= reps;
  const auto fit = fit_log_decay(trace.mean_distance);
  trace.slope = fit.slope;
  trace.intercept = fit.intercept;
  trace.fit_points = fit.points;
  return trace;
}

CountSeries aggregate_counts(const BinaryMatrix& y) {
  CountSeries out;
  out.x.resize(static_cast<std::size_t>(y.cols()));
  for (Eigen::Index t = 0; t < y.cols(); ++t) {
    std::int64_t c = 0;
    for (Eigen::Index i = 0; i < y.rows(); ++i) c += y(i, t);
    out.x[static_cast<std::size_t>(t)] = c;
  }
  return out;
}

CountSeries aggregate_counts(const Trajectory& traj) { return aggregate_counts(traj.y); }

// ---------------------------------------------------------------------------
// Stationary covariance

namespace {

struct InteractiveCoefficients {
  Vector alpha, beta, gamma, mu;
};

InteractiveCoefficients interactive_coefficients(const ModelSpec& spec) {
  if (spec.family != Family::Interactive && spec.family != Family::Exchangeable) {
    throw ValidationError("stationary covariance needs an Interactive or Exchangeable spec");
  }
  const auto mean = unconditional_mean(spec);
  const int n = spec.n_series;
  InteractiveCoefficients c;
  c.alpha.resize(n);
  c.beta.resize(n);
  c.gamma.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& s = spec.series[static_cast<std::size_t>(i)];
    c.alpha[i] = s.alpha[0];
    c.beta[i] = s.beta[0];
    c.gamma[i] = s.gamma;
    if (!(s.beta[0] + s.gamma < 1.0)) {
      throw DegenerateMean("beta + gamma must be below 1 for series " + std::to_string(i));
    }
  }
  c.mu = mean.per_series_mean;
  return c;
}

Matrix covariance_direct(const InteractiveCoefficients& c) {
  const Eigen::Index n = c.alpha.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix phi = c.gamma * Vector::Ones(n).transpose() * inv_n;
  Matrix pi = phi;
  phi.diagonal() += c.alpha + c.beta;
  pi.diagonal() += c.alpha;

  const Eigen::Index m = n * n;
  Matrix a = Matrix::Identity(m, m);
  // vec(Phi Omega Phi') = (Phi kron Phi) vec(Omega), column-major vec.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a.block(i * n, j * n, n, n) -= phi(i, j) * phi;
    }
  }
  // + sum_k Omega_kk pi_k pi_k' moves to the left-hand side.
  for (Eigen::Index k = 0; k < n; ++k) {
    const Matrix outer = pi.col(k) * pi.col(k).transpose();
    a.col(k + k * n) += Eigen::Map<const Vector>(outer.data(), m);
  }
  const Vector v = c.mu.array() * (1.0 - c.mu.array());
  const Matrix rhs_m = pi * v.asDiagonal() * pi.transpose();
  const Vector rhs = Eigen::Map<const Vector>(rhs_m.data(), m);
  Eigen::PartialPivLU<Matrix> lu(a);
  Vector sol = lu.solve(rhs);
  Matrix omega = Eigen::Map<Matrix>(sol.data(), n, n);
  return 0.5 * (omega + omega.transpose());
}

Matrix covariance_fixed_point(const InteractiveCoefficients& c) {
  const Eigen::Index n = c.alpha.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Vector d = c.alpha + c.beta;
  const Vector& g = c.gamma;
  const Vector m = c.mu.array() * (1.0 - c.mu.array());
  const Matrix ddt = d * d.transpose();
  const Matrix ggt = g * g.transpose();
  Matrix omega = Matrix::Zero(n, n);
  Matrix next(n, n);
  constexpr std::size_t kMaxSweeps = 1000000;
  for (std::size_t sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    const Vector v = m - omega.diagonal();
    const Vector r = omega.rowwise().sum();
    const double total = r.sum();
    const Vector dr = d.cwiseProduct(r) * inv_n;
    const Vector a = c.alpha.cwiseProduct(v) * inv_n;
    // Phi Omega Phi' with Phi = D + g 1'/N.
    next = omega.cwiseProduct(ddt);
    next.noalias() += dr * g.transpose();
    next.noalias() += g * dr.transpose();
    // Pi diag(v) Pi' with Pi = diag(alpha) + g 1'/N.
    next.noalias() += a * g.transpose();
    next.noalias() += g * a.transpose();
    next += (total * inv_n * inv_n + v.sum() * inv_n * inv_n) * ggt;
    next.diagonal() += c.alpha.cwiseAbs2().cwiseProduct(v);
    const double change = (next - omega).cwiseAbs().maxCoeff();
    omega.swap(next);
    if (change <= 1e-15 * std::max(omega.cwiseAbs().maxCoeff(), 1e-300)) return omega;
  }
  throw NonConvergence("stationary covariance fixed point", kMaxSweeps);
}

}  // namespace

Matrix stationary_covariance(const ModelSpec& spec, CovarianceSolver solver) {
  const auto c = interactive_coefficients(spec);
  if (solver == CovarianceSolver::Auto) {
    solver = spec.n_series <= 20 ? CovarianceSolver::Direct : CovarianceSolver::FixedPoint;
  }
  return solver == CovarianceSolver::Direct ? covariance_direct(c) : covariance_fixed_point(c);
}

StationaryMoments stationary_moments(const ModelSpec& spec, const SimConfig& cfg, int reps) {
  if (reps < 1) throw ValidationError("stationary moments need at least one replication");
  if (cfg.horizon < 2) throw ValidationError("stationary moments need a horizon of at least 2");
  StationaryMoments out;
  const Matrix omega = stationary_covariance(spec);
  out.exact_mean_sum_p = unconditional_mean(spec).total_mean;
  out.exact_var_sum_p = omega.sum();

  constexpr int kBatches = 20;
  struct RepStats {
    double sum = 0, sumsq = 0, max_p = 0;
    std::vector<double> batch;
  };
  std::vector<RepStats> stats(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), cfg.threads, [&](std::size_t r) {
    Simulator sim(spec, cfg, static_cast<std::uint32_t>(r));
    auto& st = stats[r];
    st.batch.assign(kBatches, 0.0);
    const int per_batch = std::max(1, cfg.horizon / kBatches);
    for (int t = 0; t < cfg.horizon; ++t) {
      sim.step();
      double total = 0.0;
      for (double v : sim.p()) {
        total += v;
        st.max_p = std::max(st.max_p, v);
      }
      st.sum += total;
      st.sumsq += total * total;
      st.batch[static_cast<std::size_t>(std::min(t / per_batch, kBatches - 1))] += total;
    }
    const int last = cfg.horizon - per_batch * (kBatches - 1);
    for (int b = 0; b < kBatches; ++b) st.batch[static_cast<std::size_t>(b)] /= (b + 1 < kBatches ? per_batch : last);
  });

  double sum = 0, sumsq = 0;
  std::vector<double> batches;
  for (const auto& st : stats) {
    sum += st.sum;
    sumsq += st.sumsq;
    out.mc_max_p = std::max(out.mc_max_p, st.max_p);
    batches.insert(batches.end(), st.batch.begin(), st.batch.end());
  }
  const double count = static_cast<double>(reps) * cfg.horizon;
  out.samples = static_cast<long>(count);
  out.mc_mean_sum_p = sum / count;
  out.mc_var_sum_p = (sumsq - count * out.mc_mean_sum_p * out.mc_mean_sum_p) / (count - 1.0);
  double bm = 0, bv = 0;
  for (double b : batches) bm += b;
  bm /= static_cast<double>(batches.size());
  for (double b : batches) bv += (b - bm) * (b - bm);
  bv /= static_cast<double>(batches.size() - 1);
  out.mc_mean_se = std::sqrt(bv / static_cast<double>(batches.size()));
  return out;
}

}  // namespace gab
