#include "gab/binary_mle.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gab/errors.hpp"
#include "gab/optimize.hpp"
#include "gab/parallel.hpp"
#include "gab/rng.hpp"
#include "gab/transform.hpp"

namespace gab {

std::string_view to_string(Restriction r) {
  switch (r) {
    case Restriction::None: return "none";
    case Restriction::ZeroAlpha: return "zero_alpha";
    case Restriction::ConstantOnly: return "constant_only";
  }
  return "?";
}

Restriction restriction_from_string(std::string_view name) {
  for (Restriction r : {Restriction::None, Restriction::ZeroAlpha, Restriction::ConstantOnly}) {
    if (to_string(r) == name) return r;
  }
  throw ValidationError("unknown restriction '" + std::string(name) + "'");
}

namespace {

// Which coefficients of a block are free.
struct BlockShape {
  bool logit = false;
  int alpha_lags = 0;  // outcome lags with a free coefficient
  bool gamma = false;
  int beta_lags = 0;
  int size() const { return 1 + alpha_lags + (gamma ? 1 : 0) + beta_lags; }
  // Periods consumed as presample.
  int presample() const { return std::max(alpha_lags, gamma ? 1 : 0); }
};

BlockShape block_shape(const ModelSpec& spec, Restriction restriction) {
  BlockShape b;
  switch (spec.family) {
    case Family::LinearUnivariate:
    case Family::LinearMultiLag:
      b.alpha_lags = spec.lags.q;
      b.beta_lags = spec.lags.s;
      break;
    case Family::Logit11:
      b.logit = true;
      b.alpha_lags = 1;
      b.beta_lags = 1;
      break;
    case Family::Exchangeable:
      b.gamma = true;
      b.beta_lags = 1;
      break;
    case Family::Interactive:
    case Family::Network:
      b.alpha_lags = 1;
      b.gamma = true;
      b.beta_lags = 1;
      break;
    case Family::NonlinearScalar:
    case Family::NonlinearInteractive:
      throw ValidationError(std::string("likelihood not available for family ") +
                            std::string(to_string(spec.family)));
  }
  if (restriction == Restriction::ZeroAlpha) b.alpha_lags = 0;
  if (restriction == Restriction::ConstantOnly) b = BlockShape{b.logit, 0, false, 0};
  return b;
}

// Observations of one block: k_t successes out of m trials, own outcome series
// r (alpha lags) and aggregate regressor z (gamma).
struct BlockData {
  std::vector<double> k;
  double m = 1.0;
  std::vector<double> r;
  std::vector<double> z;
  double p_init = 0.5;
};

struct BlockEval {
  double loglik = 0.0;
  Vector score;
  Matrix fisher;        // sum over periods, not normalized
  Matrix period_score;  // T_eff x dim, only when requested
  long clips = 0;
  long t_eff = 0;
};

double clamp_init(double p, double floor) { return std::clamp(p, floor, 1.0 - floor); }

BlockEval eval_block(const BlockShape& shape, const Vector& theta, const BlockData& d, double floor,
                     const LikelihoodNeeds& needs) {
  const int dim = shape.size();
  const long T = static_cast<long>(d.k.size());
  const int L = shape.presample();
  BlockEval out;
  out.score = Vector::Zero(dim);
  if (needs.fisher) out.fisher = Matrix::Zero(dim, dim);
  out.t_eff = std::max<long>(0, T - L);
  if (needs.opg) out.period_score = Matrix::Zero(out.t_eff, dim);

  const double omega = theta[0];
  const int a0 = 1;
  const int g0 = a0 + shape.alpha_lags;
  const int b0 = g0 + (shape.gamma ? 1 : 0);
  const int s = shape.beta_lags;

  // Rings of the last s filtered values (p, or x = logit p) and their sensitivities.
  const double init_p = clamp_init(d.p_init, floor);
  const double init_state = shape.logit ? std::log(init_p / (1.0 - init_p)) : init_p;
  std::vector<double> hist(static_cast<std::size_t>(std::max(s, 1)), init_state);
  Matrix dhist = Matrix::Zero(dim, std::max(s, 1));
  int head = 0;  // hist[head] is lag 1
  Vector e = Vector::Zero(dim), dstate(dim);
  const bool need_d = needs.score || needs.fisher || needs.opg;

  for (long t = L; t < T; ++t) {
    // Regressors of the recursion.
    double value = omega;
    e[0] = 1.0;
    for (int tau = 1; tau <= shape.alpha_lags; ++tau) {
      const double r = d.r[static_cast<std::size_t>(t - tau)];
      value += theta[a0 + tau - 1] * r;
      e[a0 + tau - 1] = r;
    }
    if (shape.gamma) {
      const double z = d.z[static_cast<std::size_t>(t - 1)];
      value += theta[g0] * z;
      e[g0] = z;
    }
    if (need_d) dstate = e;
    for (int tau = 1; tau <= s; ++tau) {
      const int slot = (head + tau - 1) % s;
      const double lagged = hist[static_cast<std::size_t>(slot)];
      const double b = theta[b0 + tau - 1];
      value += b * lagged;
      if (need_d) {
        dstate[b0 + tau - 1] += lagged;
        dstate.noalias() += b * dhist.col(slot);
      }
    }

    const double p = shape.logit ? 1.0 / (1.0 + std::exp(-value)) : value;
    const double k = d.k[static_cast<std::size_t>(t)];
    const double fail = d.m - k;
    const bool clipped = !(p >= floor && p <= 1.0 - floor);
    const double pc = std::clamp(p, floor, 1.0 - floor);
    if (clipped) out.clips += static_cast<long>(d.m);
    out.loglik += (k > 0 ? k * std::log(pc) : 0.0) + (fail > 0 ? fail * std::log1p(-pc) : 0.0);

    if (need_d && !clipped) {
      // d ll / d state: for p-recursions (k/p - fail/(1-p)), for the logit
      // recursion (k - m p).
      const double w = shape.logit ? (k - d.m * p) : (k / p - fail / (1.0 - p));
      if (needs.score) out.score.noalias() += w * dstate;
      if (needs.fisher) {
        const double info = shape.logit ? d.m * p * (1.0 - p) : d.m / (p * (1.0 - p));
        out.fisher.noalias() += info * dstate * dstate.transpose();
      }
      if (needs.opg) out.period_score.row(t - L) = w * dstate.transpose();
    }

    if (s > 0) {
      head = (head + s - 1) % s;
      hist[static_cast<std::size_t>(head)] = value;
      if (need_d) dhist.col(head) = dstate;
    }
  }
  return out;
}

std::vector<BlockData> build_blocks(const ModelSpec& spec, const BinaryMatrix& y,
                                    const LikelihoodOptions& opt) {
  const int n = spec.n_series;
  if (y.rows() != n) {
    throw ShapeMismatch("panel has " + std::to_string(y.rows()) + " series, spec has " +
                        std::to_string(n));
  }
  const long T = static_cast<long>(y.cols());
  if ((y.array() > 1).any()) throw ValidationError("panel entries must be 0 or 1");
  const Matrix yd = y.cast<double>();
  const Vector counts = yd.colwise().sum().transpose();
  auto to_vec = [](const auto& row) {
    std::vector<double> v(static_cast<std::size_t>(row.size()));
    for (Eigen::Index t = 0; t < row.size(); ++t) v[static_cast<std::size_t>(t)] = row[t];
    return v;
  };
  auto init_for = [&](double mean) {
    return opt.init.kind == ProbabilityInit::Kind::Fixed ? opt.init.value : mean;
  };

  std::vector<BlockData> blocks;
  if (spec.family == Family::Exchangeable) {
    BlockData b;
    b.k = to_vec(counts);
    b.m = n;
    b.z = to_vec(counts / static_cast<double>(n));
    b.p_init = init_for(T > 0 ? counts.sum() / (static_cast<double>(n) * T) : 0.5);
    blocks.push_back(std::move(b));
    return blocks;
  }
  Matrix z;
  if (spec.family == Family::Interactive) {
    z = (counts / static_cast<double>(n)).transpose().replicate(n, 1);
  } else if (spec.family == Family::Network) {
    z = (*spec.network) * yd;
  }
  for (int i = 0; i < n; ++i) {
    BlockData b;
    b.k = to_vec(yd.row(i));
    b.r = b.k;
    if (z.size() > 0) b.z = to_vec(z.row(i));
    b.p_init = init_for(T > 0 ? yd.row(i).mean() : 0.5);
    blocks.push_back(std::move(b));
  }
  return blocks;
}

std::string lag_label(const char* name, int tau, int lags) {
  return lags > 1 ? std::string(name) + std::to_string(tau) : std::string(name);
}

}  // namespace

ParamLayout make_layout(const ModelSpec& prototype, Restriction restriction) {
  const BlockShape shape = block_shape(prototype, restriction);
  ParamLayout layout;
  layout.family = prototype.family;
  layout.n_series = prototype.n_series;
  layout.lags = prototype.lags;
  layout.restriction = restriction;
  layout.blocks = prototype.family == Family::Exchangeable ? 1 : prototype.n_series;
  layout.block_size = shape.size();
  layout.simplex = !shape.logit;
  for (int b = 0; b < layout.blocks; ++b) {
    const std::string suffix =
        prototype.family == Family::Exchangeable ? std::string() : "[" + std::to_string(b) + "]";
    layout.labels.push_back("omega" + suffix);
    for (int tau = 1; tau <= shape.alpha_lags; ++tau) {
      layout.labels.push_back(lag_label("alpha", tau, shape.alpha_lags) + suffix);
    }
    if (shape.gamma) layout.labels.push_back("gamma" + suffix);
    for (int tau = 1; tau <= shape.beta_lags; ++tau) {
      layout.labels.push_back(lag_label("beta", tau, shape.beta_lags) + suffix);
    }
  }
  return layout;
}

Vector pack(const ModelSpec& spec, const ParamLayout& layout) {
  const BlockShape shape = block_shape(spec, layout.restriction);
  Vector theta(layout.size());
  for (int b = 0; b < layout.blocks; ++b) {
    const auto& c = spec.series[static_cast<std::size_t>(b)];
    int k = b * layout.block_size;
    theta[k++] = c.omega;
    for (int tau = 0; tau < shape.alpha_lags; ++tau) theta[k++] = c.alpha[static_cast<std::size_t>(tau)];
    if (shape.gamma) theta[k++] = c.gamma;
    for (int tau = 0; tau < shape.beta_lags; ++tau) theta[k++] = c.beta[static_cast<std::size_t>(tau)];
  }
  return theta;
}

ModelSpec unpack(const Vector& theta, const ParamLayout& layout, const ModelSpec& prototype) {
  if (theta.size() != layout.size()) throw ShapeMismatch("parameter vector does not match layout");
  const BlockShape shape = block_shape(prototype, layout.restriction);
  ModelSpec spec = prototype;
  spec.series.assign(static_cast<std::size_t>(prototype.n_series), SeriesCoefficients{});
  for (int i = 0; i < prototype.n_series; ++i) {
    const int b = layout.blocks == 1 ? 0 : i;
    int k = b * layout.block_size;
    SeriesCoefficients c;
    c.alpha.assign(static_cast<std::size_t>(prototype.lags.q), 0.0);
    c.beta.assign(static_cast<std::size_t>(prototype.lags.s), 0.0);
    c.omega = theta[k++];
    for (int tau = 0; tau < shape.alpha_lags; ++tau) c.alpha[static_cast<std::size_t>(tau)] = theta[k++];
    if (shape.gamma) c.gamma = theta[k++];
    for (int tau = 0; tau < shape.beta_lags; ++tau) c.beta[static_cast<std::size_t>(tau)] = theta[k++];
    spec.series[static_cast<std::size_t>(i)] = std::move(c);
  }
  return spec;
}

LikelihoodResult evaluate_likelihood(const ModelSpec& spec, const BinaryMatrix& y,
                                     const LikelihoodOptions& options, LikelihoodNeeds needs) {
  validate_spec(spec).require();
  if (!(options.floor > 0.0 && options.floor < 0.5)) throw ValidationError("floor must lie in (0, 0.5)");
  const ParamLayout layout = make_layout(spec, options.restriction);
  const BlockShape shape = block_shape(spec, options.restriction);
  const Vector theta = pack(spec, layout);
  const auto blocks = build_blocks(spec, y, options);

  LikelihoodResult res;
  const int dim = layout.block_size;
  res.score = Vector::Zero(layout.size());
  if (needs.fisher) res.fisher = Matrix::Zero(layout.size(), layout.size());
  std::vector<Matrix> period_scores;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto off = static_cast<Eigen::Index>(b) * dim;
    auto ev = eval_block(shape, theta.segment(off, dim), blocks[b], options.floor, needs);
    res.loglik += ev.loglik;
    res.clip_count += ev.clips;
    res.t_eff = ev.t_eff;
    res.score.segment(off, dim) = ev.score;
    if (needs.fisher) res.fisher.block(off, off, dim, dim) = ev.fisher;
    if (needs.opg) period_scores.push_back(std::move(ev.period_score));
  }
  res.n_obs = res.t_eff * spec.n_series;
  if (res.t_eff > 0) {
    if (needs.fisher) res.fisher /= static_cast<double>(res.t_eff);
    if (needs.opg) {
      Matrix all(res.t_eff, layout.size());
      for (std::size_t b = 0; b < period_scores.size(); ++b) {
        all.middleCols(static_cast<Eigen::Index>(b) * dim, dim) = period_scores[b];
      }
      res.opg = all.transpose() * all / static_cast<double>(res.t_eff);
    }
  }
  return res;
}

double loglik(const ModelSpec& spec, const BinaryMatrix& y, const LikelihoodOptions& options) {
  return evaluate_likelihood(spec, y, options, {false, false, false}).loglik;
}

Vector score(const ModelSpec& spec, const BinaryMatrix& y, const LikelihoodOptions& options) {
  return evaluate_likelihood(spec, y, options, {true, false, false}).score;
}

namespace {

void require_nonsingular(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (h + h.transpose()), Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (!(min_eig >= 1e-12)) {
    throw SingularInformation("Fisher information is singular (smallest eigenvalue " +
                                  std::to_string(min_eig) + "); parameters are not identified",
                              min_eig);
  }
}

}  // namespace

Matrix fisher_info(const ModelSpec& spec, const BinaryMatrix& y, const LikelihoodOptions& options) {
  auto res = evaluate_likelihood(spec, y, options, {false, true, false});
  require_nonsingular(res.fisher);
  return res.fisher;
}

// ---------------------------------------------------------------------------
// Estimation

namespace {

Vector moment_start(const BlockShape& shape, double mean) {
  const int dim = shape.size();
  Vector theta(dim);
  const double ybar = std::clamp(mean, 1e-4, 1.0 - 1e-4);
  if (shape.logit) {
    theta.setZero();
    const double x = std::log(ybar / (1.0 - ybar));
    if (shape.beta_lags > 0) {
      theta[dim - 1] = 0.5;
      theta[0] = 0.5 * x;
    } else {
      theta[0] = x;
    }
    return theta;
  }
  double persistence = 0.0;
  int k = 1;
  for (int tau = 0; tau < shape.alpha_lags; ++tau, ++k) persistence += theta[k] = 0.05;
  if (shape.gamma) persistence += theta[k++] = 0.1;
  for (int tau = 0; tau < shape.beta_lags; ++tau, ++k) {
    persistence += theta[k] = 0.5 / shape.beta_lags;
  }
  theta[0] = std::max(1e-6, ybar * (1.0 - persistence));
  if (theta.sum() >= 1.0) theta *= 0.99 / theta.sum();
  return theta;
}

Vector random_start(const BlockShape& shape, double mean, std::mt19937_64& rng) {
  const int dim = shape.size();
  Vector theta(dim);
  const double ybar = std::clamp(mean, 1e-4, 1.0 - 1e-4);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (shape.logit) {
    std::normal_distribution<double> normal(0.0, 0.5);
    for (int j = 1; j < dim; ++j) theta[j] = normal(rng);
    double beta = 0.0;
    if (shape.beta_lags > 0) theta[dim - 1] = beta = 0.9 * unif(rng);
    theta[0] = std::log(ybar / (1.0 - ybar)) * (1.0 - beta);
    return theta;
  }
  if (dim == 1) {
    theta[0] = std::clamp(ybar * (0.5 + unif(rng)), 1e-6, 1.0 - 1e-6);
    return theta;
  }
  const double persistence = 0.05 + 0.85 * unif(rng);
  std::exponential_distribution<double> expo(1.0);
  Vector w(dim - 1);
  for (int j = 0; j < dim - 1; ++j) w[j] = expo(rng) + 1e-3;
  w *= persistence / w.sum();
  theta.tail(dim - 1) = w;
  theta[0] = std::max(1e-6, ybar * (1.0 - persistence));
  if (theta.sum() >= 1.0) theta *= 0.99 / theta.sum();
  return theta;
}

struct GroupFit {
  Vector theta;
  double f = std::numeric_limits<double>::infinity();
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  int starts_ok = 0;
};

// Fits the blocks listed in `members` jointly.
GroupFit fit_group(const BlockShape& shape, const std::vector<BlockData>& blocks,
                   const std::vector<std::size_t>& members, const FitConfig& cfg,
                   std::uint64_t group_seed) {
  const int dim = shape.size();
  const auto total = static_cast<Eigen::Index>(dim * members.size());
  double cells = 0.0;
  for (auto b : members) {
    cells += blocks[b].m * static_cast<double>(blocks[b].k.size() - static_cast<std::size_t>(shape.presample()));
  }
  cells = std::max(cells, 1.0);
  const LikelihoodNeeds needs{true, false, false};

  auto to_theta = [&](const Vector& u, Eigen::Index off) -> Vector {
    const Vector seg = u.segment(off, dim);
    return shape.logit ? seg : StickBreaking::forward(seg);
  };
  Objective objective = [&](const Vector& u, Vector& grad) {
    grad.resize(total);
    double ll = 0.0;
    for (std::size_t j = 0; j < members.size(); ++j) {
      const auto off = static_cast<Eigen::Index>(j) * dim;
      const Vector theta = to_theta(u, off);
      const auto ev = eval_block(shape, theta, blocks[members[j]], cfg.likelihood.floor, needs);
      ll += ev.loglik;
      if (shape.logit) {
        grad.segment(off, dim) = -ev.score / cells;
      } else {
        grad.segment(off, dim) = -StickBreaking::jacobian(u.segment(off, dim)).transpose() * ev.score / cells;
      }
    }
    return -ll / cells;
  };

  BfgsOptions bopt;
  bopt.max_iterations = cfg.max_iterations;
  bopt.grad_tol = cfg.grad_tol;
  GroupFit best;
  std::mt19937_64 rng(group_seed);
  const int starts = std::max(1, cfg.starts);
  for (int start = 0; start < starts; ++start) {
    Vector u0(total);
    for (std::size_t j = 0; j < members.size(); ++j) {
      const double mean = blocks[members[j]].p_init;
      const Vector theta0 = start == 0 ? moment_start(shape, mean) : random_start(shape, mean, rng);
      u0.segment(static_cast<Eigen::Index>(j) * dim, dim) =
          shape.logit ? theta0 : StickBreaking::inverse(theta0);
    }
    const BfgsResult r = minimize_bfgs(objective, u0, bopt);
    const bool usable = std::isfinite(r.f) && (r.converged || r.grad_norm <= 1e-4);
    if (!usable) continue;
    ++best.starts_ok;
    if (r.f < best.f) {
      best.f = r.f;
      best.iterations = r.iterations;
      best.grad_norm = r.grad_norm;
      best.converged = r.converged;
      best.theta.resize(total);
      for (std::size_t j = 0; j < members.size(); ++j) {
        const auto off = static_cast<Eigen::Index>(j) * dim;
        best.theta.segment(off, dim) = to_theta(r.x, off);
      }
    }
  }
  return best;
}

}  // namespace

FitResult fit_mle(const ModelSpec& prototype, const BinaryMatrix& y, const FitConfig& cfg) {
  if (prototype.family == Family::Exchangeable || prototype.family == Family::Interactive ||
      prototype.family == Family::Network) {
    if (prototype.lags.s != 1 || prototype.lags.q != 1) throw ValidationError("family requires s = q = 1");
  }
  if (prototype.family == Family::Network && !prototype.network) {
    throw ValidationError("network family needs W");
  }
  const BlockShape shape = block_shape(prototype, cfg.restriction);
  if (y.cols() < std::max(cfg.min_periods, shape.presample() + 2)) {
    throw ValidationError("panel has " + std::to_string(y.cols()) + " periods, fewer than the minimum " +
                          std::to_string(std::max(cfg.min_periods, shape.presample() + 2)));
  }
  const auto blocks = build_blocks(prototype, y, cfg.likelihood);
  const ParamLayout layout = make_layout(prototype, cfg.restriction);

  std::vector<std::vector<std::size_t>> groups;
  if (cfg.separable) {
    for (std::size_t b = 0; b < blocks.size(); ++b) groups.push_back({b});
  } else {
    groups.emplace_back();
    for (std::size_t b = 0; b < blocks.size(); ++b) groups.back().push_back(b);
  }
  std::vector<GroupFit> fits(groups.size());
  parallel_for(groups.size(), cfg.threads, [&](std::size_t g) {
    fits[g] = fit_group(shape, blocks, groups[g], cfg, derive_seed(cfg.seed, g));
  });

  FitResult res;
  res.layout = layout;
  res.theta.resize(layout.size());
  res.converged = true;
  res.starts_ok = cfg.starts;
  const int dim = layout.block_size;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& fit = fits[g];
    if (fit.starts_ok == 0) {
      throw NoConvergence("every optimizer start failed for parameter block " + std::to_string(g));
    }
    for (std::size_t j = 0; j < groups[g].size(); ++j) {
      res.theta.segment(static_cast<Eigen::Index>(groups[g][j]) * dim, dim) =
          fit.theta.segment(static_cast<Eigen::Index>(j) * dim, dim);
    }
    res.iterations = std::max(res.iterations, fit.iterations);
    res.grad_norm = std::max(res.grad_norm, fit.grad_norm);
    res.converged = res.converged && fit.converged;
    res.starts_ok = std::min(res.starts_ok, fit.starts_ok);
  }

  res.spec = unpack(res.theta, layout, prototype);
  LikelihoodOptions lopt = cfg.likelihood;
  lopt.restriction = cfg.restriction;
  const auto ev = evaluate_likelihood(res.spec, y, lopt, {false, true, false});
  res.loglik = ev.loglik;
  res.fisher = ev.fisher;
  res.clip_count = ev.clip_count;
  res.t_eff = ev.t_eff;
  res.std_errors = Vector::Constant(layout.size(), std::numeric_limits<double>::quiet_NaN());
  try {
    require_nonsingular(res.fisher);
    const Matrix inv = res.fisher.inverse();
    res.std_errors = (inv.diagonal() / static_cast<double>(res.t_eff)).cwiseSqrt();
    res.fisher_ok = true;
  } catch (const SingularInformation& e) {
    res.fisher_message = e.what();
  }
  return res;
}

// ---------------------------------------------------------------------------
// Forecasting

Matrix filter_probabilities(const ModelSpec& spec, const BinaryMatrix& y, const Vector& p_init) {
  validate_spec(spec).require();
  const int n = spec.n_series;
  if (y.rows() != n) throw ShapeMismatch("panel rows do not match the number of series");
  if (p_init.size() != n) throw ShapeMismatch("initial probability vector has wrong length");
  const Eigen::Index T = y.cols();
  Matrix out(n, T);
  if (T == 0) return out;
  PanelState state = make_state(spec);
  std::vector<double> p(static_cast<std::size_t>(n));
  std::vector<std::uint8_t> yt(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    p[static_cast<std::size_t>(i)] = p_init[i];
    yt[static_cast<std::size_t>(i)] = y(i, 0);
  }
  state.fill(p, yt);
  const Eigen::Index warm = std::min<Eigen::Index>(spec.lags.max(), T);
  for (Eigen::Index t = 0; t < T; ++t) {
    if (t < warm) {
      for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = p_init[i];
    } else {
      eval_g(spec, state, p);
    }
    for (int i = 0; i < n; ++i) {
      out(i, t) = p[static_cast<std::size_t>(i)];
      yt[static_cast<std::size_t>(i)] = y(i, t);
    }
    state.push(p, yt);
  }
  return out;
}

Matrix forecast_one_step(const ModelSpec& fitted, const BinaryMatrix& y, int start) {
  if (start < 0 || start > y.cols()) throw ValidationError("forecast start outside the panel");
  const Eigen::Index window = start > 0 ? start : y.cols();
  Vector p_init(y.rows());
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    p_init[i] = window > 0 ? y.row(i).head(window).cast<double>().mean() : 0.5;
  }
  const Matrix filtered = filter_probabilities(fitted, y, p_init);
  return filtered.rightCols(y.cols() - start);
}

Matrix forecast_one_step(const FitResult& fitted, const BinaryMatrix& y, int start) {
  return forecast_one_step(fitted.spec, y, start);
}

Matrix forecast_constant(const BinaryMatrix& y, int start, double value) {
  if (start < 0 || start > y.cols()) throw ValidationError("forecast start outside the panel");
  return Matrix::Constant(y.rows(), y.cols() - start, value);
}

Matrix forecast_persistence(const BinaryMatrix& y, int start) {
  if (start < 1 || start > y.cols()) {
    throw ValidationError("persistence forecast needs at least one period before the start");
  }
  return y.middleCols(start - 1, y.cols() - start).cast<double>();
}

MseReport mse_eval(const Matrix& forecasts, const BinaryMatrix& realized) {
  if (forecasts.rows() != realized.rows() || forecasts.cols() != realized.cols()) {
    throw ShapeMismatch("forecast panel is " + std::to_string(forecasts.rows()) + "x" +
                        std::to_string(forecasts.cols()) + ", realized panel is " +
                        std::to_string(realized.rows()) + "x" + std::to_string(realized.cols()));
  }
  if (forecasts.size() == 0) throw ValidationError("cannot evaluate an empty forecast window");
  const Matrix err = (forecasts - realized.cast<double>()).array().square().matrix();
  MseReport r;
  r.per_series = err.rowwise().mean();
  r.pooled = err.mean();
  return r;
}

}  // namespace gab
