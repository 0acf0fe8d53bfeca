#include "gab/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gab/errors.hpp"
#include "gab/parallel.hpp"

namespace gab {

namespace {

constexpr double kTailMass = 1e-12;

struct ScaledValues {
  std::vector<double> c, a, gamma;
};

ScaledValues scaled_values(const RareEventScaling& sc, int n) {
  ScaledValues v;
  const auto nn = static_cast<std::size_t>(n);
  v.c.assign(nn, sc.c);
  v.a.assign(nn, sc.a);
  v.gamma.assign(nn, sc.gamma);
  if (sc.heterogeneity > 0.0) {
    if (sc.heterogeneity >= 1.0) throw ValidationError("heterogeneity must be in [0, 1)");
    std::mt19937_64 rng(derive_seed(sc.seed, static_cast<std::uint64_t>(n)));
    std::uniform_real_distribution<double> z(-1.0, 1.0);
    for (std::size_t i = 0; i < nn; ++i) {
      v.c[i] = sc.c * (1.0 + sc.heterogeneity * z(rng));
      v.a[i] = sc.a * (1.0 + sc.heterogeneity * z(rng));
      const double zg = z(rng);
      if (sc.heterogeneous_gamma) v.gamma[i] = sc.gamma * (1.0 + sc.heterogeneity * zg);
    }
  }
  for (std::size_t i = 0; i < nn; ++i) {
    if (v.c[i] < 0.0 || v.c[i] > sc.bound || v.a[i] < 0.0 || v.a[i] > sc.bound) {
      throw ValidationError("c_i and a_i must lie in [0, " + std::to_string(sc.bound) + "]");
    }
  }
  return v;
}

void check_grid_size(int n) {
  if (n < 1) throw ValidationError("N must be positive");
}

double log_poisson(double lambda, int k) {
  if (lambda == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return -lambda + k * std::log(lambda) - std::lgamma(k + 1.0);
}

int truncation_point(double lambda) {
  return static_cast<int>(std::ceil(lambda + 12.0 * std::sqrt(lambda) + 25.0));
}

}  // namespace

ModelSpec make_rare_event_spec(const RareEventScaling& sc, int n) {
  check_grid_size(n);
  if (!(sc.kappa > 0.0)) throw ValidationError("kappa must be positive");
  const auto v = scaled_values(sc, n);
  const auto nn = static_cast<std::size_t>(n);
  std::vector<double> omega(nn), alpha(nn), beta(nn, sc.beta);
  const double scale = std::pow(static_cast<double>(n), -sc.kappa);
  for (std::size_t i = 0; i < nn; ++i) {
    omega[i] = v.c[i] / n;
    alpha[i] = v.a[i] * scale;
  }
  ModelSpec spec = make_interactive(omega, alpha, v.gamma, beta);
  const auto report = validate_spec(spec);
  if (!report.ok()) {
    throw ValidationError("rare-event spec infeasible at N = " + std::to_string(n) + ": " +
                          report.summary());
  }
  return spec;
}

ModelSpec make_rare_event_network_spec(const RareEventScaling& sc, int n, int degree) {
  ModelSpec base = make_rare_event_spec(sc, n);
  std::vector<double> omega, alpha, gamma, beta;
  for (const auto& c : base.series) {
    omega.push_back(c.omega);
    alpha.push_back(c.alpha[0]);
    gamma.push_back(c.gamma);
    beta.push_back(c.beta[0]);
  }
  ModelSpec spec = make_network(omega, alpha, gamma, beta, build_regular_network(n, degree));
  validate_spec(spec).require();
  return spec;
}

std::vector<Feasibility> rare_event_feasibility(const RareEventScaling& sc) {
  std::vector<Feasibility> out;
  for (int n : sc.n_grid) {
    Feasibility f{n, true, {}};
    try {
      make_rare_event_spec(sc, n);
    } catch (const ValidationError& e) {
      f.feasible = false;
      f.detail = e.what();
    }
    out.push_back(std::move(f));
  }
  return out;
}

double LimitParameters::variance() const {
  const double persistence = beta + gamma_bar;
  return c_bar * gamma_bar * gamma_bar / ((1.0 - persistence * persistence) * (1.0 - persistence));
}

LimitParameters limit_parameters(const ModelSpec& spec) {
  if (spec.family != Family::Interactive && spec.family != Family::Network &&
      spec.family != Family::Exchangeable) {
    throw ValidationError("limit parameters need an Interactive, Network or Exchangeable spec");
  }
  LimitParameters lp;
  const double n = spec.n_series;
  for (const auto& c : spec.series) {
    lp.c_bar += c.omega;
    lp.gamma_bar += c.gamma / n;
    lp.beta += c.beta[0] / n;
  }
  return lp;
}

std::vector<double> bernoulli_sum_pmf(std::span<const double> q) {
  return bernoulli_sum_pmf(q, static_cast<int>(q.size()));
}

std::vector<double> bernoulli_sum_pmf(std::span<const double> q, int max_k) {
  if (max_k < 0) throw ValidationError("max_k must be nonnegative");
  const int top = std::min<int>(max_k, static_cast<int>(q.size()));
  std::vector<double> pmf(static_cast<std::size_t>(top) + 1, 0.0);
  pmf[0] = 1.0;
  int filled = 0;
  for (double qi : q) {
    if (!(qi >= 0.0 && qi <= 1.0)) throw ValidationError("Bernoulli probability outside [0,1]");
    filled = std::min(filled + 1, top);
    for (int k = filled; k >= 1; --k) {
      pmf[static_cast<std::size_t>(k)] =
          pmf[static_cast<std::size_t>(k)] * (1.0 - qi) + pmf[static_cast<std::size_t>(k - 1)] * qi;
    }
    pmf[0] *= 1.0 - qi;
  }
  return pmf;
}

std::vector<double> poisson_pmf(double lambda, int max_k) {
  if (!(lambda >= 0.0)) throw ValidationError("Poisson intensity must be nonnegative");
  std::vector<double> pmf(static_cast<std::size_t>(std::max(max_k, 0)) + 1);
  for (int k = 0; k <= max_k; ++k) pmf[static_cast<std::size_t>(k)] = std::exp(log_poisson(lambda, k));
  return pmf;
}

double poisson_tv_distance(std::span<const double> q) {
  const auto pb = bernoulli_sum_pmf(q);
  double lambda = 0.0;
  for (double v : q) lambda += v;
  const int n = static_cast<int>(q.size());
  double total = 0.0, cdf = 0.0;
  int k = 0;
  for (;; ++k) {
    const double pois = std::exp(log_poisson(lambda, k));
    const double pbk = k <= n ? pb[static_cast<std::size_t>(k)] : 0.0;
    total += std::abs(pbk - pois);
    cdf += pois;
    if (k >= n && cdf >= 1.0 - kTailMass) break;
  }
  // Remaining Poisson mass beyond k, where the Poisson-binomial PMF is zero.
  const double tail = std::max(0.0, 1.0 - cdf);
  return std::min(1.0, 0.5 * (total + tail));
}

double poisson_tv_distance_truncated(std::span<const double> q) {
  double lambda = 0.0;
  for (double v : q) lambda += v;
  const int max_k = std::min<int>(truncation_point(lambda), static_cast<int>(q.size()));
  if (max_k == static_cast<int>(q.size())) return poisson_tv_distance(q);
  const auto pb = bernoulli_sum_pmf(q, max_k);
  double total = 0.0, pb_mass = 0.0, pois_mass = 0.0;
  for (int k = 0; k <= max_k; ++k) {
    const double pois = std::exp(log_poisson(lambda, k));
    total += std::abs(pb[static_cast<std::size_t>(k)] - pois);
    pb_mass += pb[static_cast<std::size_t>(k)];
    pois_mass += pois;
  }
  total += std::max(0.0, 1.0 - pb_mass) + std::max(0.0, 1.0 - pois_mass);
  return std::min(1.0, 0.5 * total);
}

SparseRowMatrix build_regular_network(int n, int d) {
  if (n < 1) throw ValidationError("network size must be positive");
  if (d < 1 || d > n) {
    throw ValidationError("degree " + std::to_string(d) + " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(d));
  const double w = 1.0 / d;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) entries.emplace_back(i, (i + k) % n, w);
  }
  SparseRowMatrix out(n, n);
  out.setFromTriplets(entries.begin(), entries.end());
  out.makeCompressed();
  return out;
}

int network_degree(int n, double multiplier) {
  if (n < 1) throw ValidationError("network size must be positive");
  const int d = static_cast<int>(std::ceil(multiplier * std::log(static_cast<double>(n))));
  return std::clamp(d, 1, n);
}

LimitDiagnostics diagnose_limit(const ModelSpec& spec, const ExperimentConfig& cfg) {
  if (cfg.reps < 1 || cfg.horizon < 2) throw ValidationError("experiment needs reps >= 1 and T >= 2");
  if (cfg.tv_stride < 1 || cfg.pit_bins < 1) throw ValidationError("tv_stride and pit_bins must be >= 1");
  validate_spec(spec).require();
  const LimitParameters lp = limit_parameters(spec);
  const int bins = cfg.pit_bins;

  struct RepStats {
    double sum_x = 0, sum_s = 0, sum_s2 = 0, sum_resid2 = 0, sum_gap = 0, tv = 0, max_p = 0;
    long tv_count = 0;
    std::vector<double> hist, mixture, pit;
    std::vector<double> batch_x;
  };
  constexpr int kBatches = 10;
  std::vector<RepStats> stats(static_cast<std::size_t>(cfg.reps));

  SimConfig sim_cfg;
  sim_cfg.seed = cfg.seed;
  sim_cfg.horizon = cfg.horizon;
  sim_cfg.burn_in = cfg.burn_in;
  sim_cfg.init = StationaryWarmup{};

  parallel_for(stats.size(), cfg.threads, [&](std::size_t r) {
    auto& st = stats[r];
    st.pit.assign(static_cast<std::size_t>(bins), 0.0);
    st.batch_x.assign(kBatches, 0.0);
    Simulator sim(spec, sim_cfg, static_cast<std::uint32_t>(r));
    double lambda = lp.mean();
    double prev_x = -1.0;
    const int per_batch = std::max(1, cfg.horizon / kBatches);
    for (int t = 0; t < cfg.horizon; ++t) {
      sim.step();
      if (prev_x >= 0.0) lambda = lp.c_bar + lp.gamma_bar * prev_x + lp.beta * lambda;
      double s = 0.0;
      long x = 0;
      for (std::size_t i = 0; i < sim.p().size(); ++i) {
        s += sim.p()[i];
        x += sim.y()[i];
        st.max_p = std::max(st.max_p, sim.p()[i]);
      }
      const double xd = static_cast<double>(x);
      st.sum_x += xd;
      st.sum_s += s;
      st.sum_s2 += s * s;
      st.sum_resid2 += (xd - s) * (xd - s);
      st.sum_gap += std::abs(lambda - s);
      st.batch_x[static_cast<std::size_t>(std::min(t / per_batch, kBatches - 1))] += xd;

      // Pooled histogram of X and the matching Poisson(sum p) mixture.
      const int top = std::max(truncation_point(s), static_cast<int>(x));
      if (static_cast<int>(st.hist.size()) <= top) {
        st.hist.resize(static_cast<std::size_t>(top) + 1, 0.0);
        st.mixture.resize(static_cast<std::size_t>(top) + 1, 0.0);
      }
      st.hist[static_cast<std::size_t>(x)] += 1.0;
      double term = std::exp(-s);
      for (int k = 0; k <= top; ++k) {
        st.mixture[static_cast<std::size_t>(k)] += term;
        term *= s / (k + 1);
      }

      // Nonrandomized PIT under Poisson(lambda): F(u | x) is linear between
      // P(X <= x - 1) and P(X <= x).
      double lo = 0.0;
      double mass = std::exp(-lambda);
      for (long k = 0; k < x; ++k) {
        lo += mass;
        mass *= lambda / static_cast<double>(k + 1);
      }
      const double hi = lo + mass;
      for (int j = 1; j <= bins; ++j) {
        const double u = static_cast<double>(j) / bins;
        double f;
        if (u <= lo) {
          f = 0.0;
        } else if (u >= hi) {
          f = 1.0;
        } else {
          f = (u - lo) / (hi - lo);
        }
        st.pit[static_cast<std::size_t>(j - 1)] += f;
      }

      if (t % cfg.tv_stride == 0) {
        st.tv += poisson_tv_distance_truncated(sim.p());
        ++st.tv_count;
      }
      prev_x = xd;
    }
    const int last = cfg.horizon - per_batch * (kBatches - 1);
    for (int b = 0; b < kBatches; ++b) {
      st.batch_x[static_cast<std::size_t>(b)] /= (b + 1 < kBatches ? per_batch : last);
    }
  });

  LimitDiagnostics d;
  d.n = spec.n_series;
  if (spec.family == Family::Network && spec.network) {
    d.degree = static_cast<int>(spec.network->row(0).nonZeros());
  }
  double sum_x = 0, sum_s = 0, sum_s2 = 0, sum_resid2 = 0, sum_gap = 0, tv = 0;
  long tv_count = 0;
  std::vector<double> hist, mixture, pit(static_cast<std::size_t>(bins), 0.0), batches;
  for (const auto& st : stats) {
    sum_x += st.sum_x;
    sum_s += st.sum_s;
    sum_s2 += st.sum_s2;
    sum_resid2 += st.sum_resid2;
    sum_gap += st.sum_gap;
    tv += st.tv;
    tv_count += st.tv_count;
    d.max_p = std::max(d.max_p, st.max_p);
    if (st.hist.size() > hist.size()) {
      hist.resize(st.hist.size(), 0.0);
      mixture.resize(st.hist.size(), 0.0);
    }
    for (std::size_t k = 0; k < st.hist.size(); ++k) {
      hist[k] += st.hist[k];
      mixture[k] += st.mixture[k];
    }
    for (std::size_t j = 0; j < pit.size(); ++j) pit[j] += st.pit[j];
    batches.insert(batches.end(), st.batch_x.begin(), st.batch_x.end());
  }
  const double count = static_cast<double>(cfg.reps) * cfg.horizon;
  d.samples = static_cast<long>(count);
  d.mean_x = sum_x / count;
  d.mean_sum_p = sum_s / count;
  d.var_sum_p = (sum_s2 - count * d.mean_sum_p * d.mean_sum_p) / (count - 1.0);
  d.dispersion_ratio = sum_resid2 / sum_s;
  d.lambda_gap = sum_gap / count;
  d.tv_mean = tv / static_cast<double>(tv_count);
  double tv_pooled = 0.0, mix_mass = 0.0;
  for (std::size_t k = 0; k < hist.size(); ++k) {
    tv_pooled += std::abs(hist[k] / count - mixture[k] / count);
    mix_mass += mixture[k] / count;
  }
  d.tv_pooled = 0.5 * (tv_pooled + std::max(0.0, 1.0 - mix_mass));
  double prev = 0.0;
  for (std::size_t j = 0; j < pit.size(); ++j) {
    const double f = pit[j] / count;
    d.pit_deviation = std::max(d.pit_deviation, std::abs(bins * (f - prev) - 1.0));
    prev = f;
  }
  double bm = 0.0, bv = 0.0;
  for (double b : batches) bm += b;
  bm /= static_cast<double>(batches.size());
  for (double b : batches) bv += (b - bm) * (b - bm);
  if (batches.size() > 1) bv /= static_cast<double>(batches.size() - 1);
  d.mean_x_se = std::sqrt(bv / static_cast<double>(batches.size()));

  d.limit_mean = lp.mean();
  d.limit_var = lp.variance();
  d.exact_mean_sum_p = std::numeric_limits<double>::quiet_NaN();
  d.exact_var_sum_p = std::numeric_limits<double>::quiet_NaN();
  if (cfg.exact_moments && spec.family == Family::Interactive) {
    d.exact_mean_sum_p = unconditional_mean(spec).total_mean;
    d.exact_var_sum_p = stationary_covariance(spec, CovarianceSolver::FixedPoint).sum();
  }
  return d;
}

std::vector<LimitDiagnostics> run_limit_experiment(const RareEventScaling& sc,
                                                   const ExperimentConfig& cfg) {
  std::vector<ModelSpec> specs;
  for (int n : sc.n_grid) specs.push_back(make_rare_event_spec(sc, n));
  std::vector<LimitDiagnostics> out;
  for (const auto& spec : specs) out.push_back(diagnose_limit(spec, cfg));
  return out;
}

std::vector<NetworkComparison> run_network_limit_experiment(const RareEventScaling& scaling,
                                                            double degree_multiplier,
                                                            const ExperimentConfig& cfg) {
  if (!(degree_multiplier > 0.0)) throw ValidationError("degree multiplier must be positive");
  RareEventScaling sc = scaling;
  sc.heterogeneous_gamma = false;
  std::vector<NetworkComparison> out;
  for (int n : sc.n_grid) {
    NetworkComparison cmp;
    const ModelSpec complete = make_rare_event_spec(sc, n);
    const ModelSpec network = make_rare_event_network_spec(sc, n, network_degree(n, degree_multiplier));
    ExperimentConfig net_cfg = cfg;
    net_cfg.exact_moments = false;
    cmp.complete = diagnose_limit(complete, cfg);
    cmp.network = diagnose_limit(network, net_cfg);
    cmp.rel_diff_mean_x = std::abs(cmp.network.mean_x - cmp.complete.mean_x) / cmp.complete.mean_x;
    cmp.rel_diff_var_sum_p =
        std::abs(cmp.network.var_sum_p - cmp.complete.var_sum_p) / cmp.complete.var_sum_p;
    out.push_back(cmp);
  }
  return out;
}

}  // namespace gab
