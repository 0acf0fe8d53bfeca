#include "gab/contraction.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gab/errors.hpp"

namespace gab {

std::optional<LipschitzLayout> lipschitz_layout(const ModelSpec& spec) {
  validate_spec(spec).require();
  const int n = spec.n_series;
  LipschitzLayout layout;
  layout.n = n;
  layout.alpha.assign(static_cast<std::size_t>(spec.lags.q), Matrix::Zero(n, n));
  layout.beta.assign(static_cast<std::size_t>(spec.lags.s), Matrix::Zero(n, n));

  switch (spec.family) {
    case Family::LinearUnivariate:
    case Family::LinearMultiLag:
      for (int i = 0; i < n; ++i) {
        const auto& c = spec.series[static_cast<std::size_t>(i)];
        for (int tau = 0; tau < spec.lags.q; ++tau) layout.alpha[tau](i, i) = c.alpha[tau];
        for (int tau = 0; tau < spec.lags.s; ++tau) layout.beta[tau](i, i) = c.beta[tau];
      }
      return layout;
    case Family::NonlinearScalar: {
      const double lip = scalar_f_lipschitz(*spec.scalar_nonlinearity);
      for (int i = 0; i < n; ++i) {
        layout.alpha[0](i, i) = spec.series[static_cast<std::size_t>(i)].alpha[0];
        layout.beta[0](i, i) = lip;
      }
      return layout;
    }
    case Family::Exchangeable:
    case Family::Interactive:
      for (int i = 0; i < n; ++i) {
        const auto& c = spec.series[static_cast<std::size_t>(i)];
        layout.alpha[0].row(i).setConstant(c.gamma / n);
        layout.alpha[0](i, i) += c.alpha[0];
        layout.beta[0](i, i) = c.beta[0];
      }
      return layout;
    case Family::Network: {
      const Matrix w(*spec.network);
      for (int i = 0; i < n; ++i) {
        const auto& c = spec.series[static_cast<std::size_t>(i)];
        layout.alpha[0].row(i) = c.gamma * w.row(i);
        layout.alpha[0](i, i) += c.alpha[0];
        layout.beta[0](i, i) = c.beta[0];
      }
      return layout;
    }
    case Family::Logit11:
    case Family::NonlinearInteractive:
      return std::nullopt;
  }
  return std::nullopt;
}

Matrix companion_matrix(const LipschitzLayout& layout) {
  const int n = layout.n;
  if (n < 1) throw ShapeMismatch("companion matrix needs N >= 1");
  for (const auto* blocks : {&layout.alpha, &layout.beta}) {
    for (const auto& b : *blocks) {
      if (b.rows() != n || b.cols() != n) {
        throw ShapeMismatch("Lipschitz block is " + std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()) + ", expected " + std::to_string(n) + "x" +
                            std::to_string(n));
      }
    }
  }
  const int m = static_cast<int>(std::max(layout.alpha.size(), layout.beta.size()));
  if (m < 1) throw ShapeMismatch("companion matrix needs at least one lag");
  Matrix phi = Matrix::Zero(static_cast<Eigen::Index>(n) * m, static_cast<Eigen::Index>(n) * m);
  for (int tau = 0; tau < m; ++tau) {
    auto block = phi.block(0, static_cast<Eigen::Index>(tau) * n, n, n);
    if (tau < static_cast<int>(layout.alpha.size())) block += layout.alpha[tau];
    if (tau < static_cast<int>(layout.beta.size())) block += layout.beta[tau];
  }
  if (m > 1) {
    phi.block(n, 0, static_cast<Eigen::Index>(n) * (m - 1), static_cast<Eigen::Index>(n) * (m - 1))
        .setIdentity();
  }
  return phi;
}

namespace {

// Strongly connected components of the graph i -> j when m(i,j) != 0
// (iterative Tarjan).
std::vector<std::vector<int>> strong_components(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && m(i, j) != 0.0) adj[static_cast<std::size_t>(i)].push_back(j);
    }
  }
  std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
  std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<int> stack;
  std::vector<std::vector<int>> comps;
  int counter = 0;
  struct Frame {
    int v;
    std::size_t next;
  };
  for (int root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] >= 0) continue;
    std::vector<Frame> call{{root, 0}};
    index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = counter++;
    stack.push_back(root);
    on_stack[static_cast<std::size_t>(root)] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto v = static_cast<std::size_t>(f.v);
      if (f.next < adj[v].size()) {
        const int w = adj[v][f.next++];
        const auto wu = static_cast<std::size_t>(w);
        if (index[wu] < 0) {
          index[wu] = low[wu] = counter++;
          stack.push_back(w);
          on_stack[wu] = 1;
          call.push_back({w, 0});
        } else if (on_stack[wu]) {
          low[v] = std::min(low[v], index[wu]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<int> comp;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(w)] = 0;
          comp.push_back(w);
        } while (w != f.v);
        comps.push_back(std::move(comp));
      }
      const int done = f.v;
      call.pop_back();
      if (!call.empty()) {
        const auto parent = static_cast<std::size_t>(call.back().v);
        low[parent] = std::min(low[parent], low[static_cast<std::size_t>(done)]);
      }
    }
  }
  return comps;
}

// Perron root of an irreducible nonnegative block.
double perron_root(const Matrix& b, const SpectralOptions& opt) {
  const Vector rows = b.rowwise().sum();
  const double lo0 = rows.minCoeff();
  const double hi0 = rows.maxCoeff();
  if (hi0 - lo0 <= opt.rel_tol * 1e-3 * hi0) return 0.5 * (lo0 + hi0);
  // Shift by a lower bound of the root: keeps the dominant eigenvalue strictly
  // dominant (breaks periodicity) without swamping the root in the sum.
  const double shift = lo0 > 0.0 ? lo0 : hi0;
  Vector x = Vector::Ones(b.rows());
  Vector z(b.rows());
  double best_lo = lo0, best_hi = hi0;
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    z.noalias() = b * x;
    z += shift * x;
    const Vector ratio = z.cwiseQuotient(x);
    best_lo = std::max(best_lo, ratio.minCoeff() - shift);
    best_hi = std::min(best_hi, ratio.maxCoeff() - shift);
    if (best_hi - best_lo <= opt.rel_tol * 0.1 * best_lo) return 0.5 * (best_lo + best_hi);
    x = z / z.maxCoeff();
  }
  throw NonConvergence("spectral radius: Collatz-Wielandt bracket did not close", opt.max_iterations);
}

// Dominant modulus of a general real block.
double dominant_modulus(const Matrix& b, const SpectralOptions& opt) {
  const Eigen::Index k = b.rows();
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  Vector x(k);
  for (Eigen::Index i = 0; i < k; ++i) x[i] = normal(rng);
  x.normalize();

  double prev_two_step = -1.0;
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    Vector y = b * x;
    const double ny = y.norm();
    if (ny == 0.0) return 0.0;
    const double lambda = x.dot(y);
    if ((y - lambda * x).norm() <= opt.rel_tol * 1e-2 * std::abs(lambda)) return std::abs(lambda);

    if (it % 20 == 0) {
      // Fit x2 = a x1 + c x0 on three consecutive iterates: a complex or +-
      // dominant pair makes the iterates live in a 2-D invariant subspace.
      const Vector x1 = y / ny;
      const Vector x2 = b * x1;
      const Vector x0 = x / ny;
      Eigen::Matrix2d g;
      g << x1.dot(x1), x1.dot(x0), x0.dot(x1), x0.dot(x0);
      const Eigen::Vector2d rhs(x1.dot(x2), x0.dot(x2));
      if (std::abs(g.determinant()) > 1e-14 * g.trace() * g.trace()) {
        const Eigen::Vector2d ac = g.ldlt().solve(rhs);
        const double resid = (x2 - ac[0] * x1 - ac[1] * x0).norm();
        const double disc = ac[0] * ac[0] + 4.0 * ac[1];
        const double modulus = disc >= 0.0
                                   ? 0.5 * (std::abs(ac[0]) + std::sqrt(disc))
                                   : std::sqrt(-ac[1]);
        if (resid <= opt.rel_tol * 1e-2 * x2.norm() && prev_two_step >= 0.0 &&
            std::abs(modulus - prev_two_step) <= opt.rel_tol * 0.1 * modulus) {
          return modulus;
        }
        prev_two_step = modulus;
      }
    }
    if (!std::isfinite(ny)) break;
    x = y / ny;
  }
  throw NonConvergence("spectral radius: power iteration did not converge", opt.max_iterations);
}

}  // namespace

double spectral_radius(const Matrix& m, const SpectralOptions& options) {
  if (m.rows() != m.cols()) throw ShapeMismatch("spectral radius needs a square matrix");
  if (m.size() == 0) return 0.0;
  if (!m.allFinite()) throw ValidationError("spectral radius: matrix has non-finite entries");
  const bool nonneg = (m.array() >= 0.0).all();
  double rho = 0.0;
  for (const auto& comp : strong_components(m)) {
    const auto k = static_cast<Eigen::Index>(comp.size());
    if (k == 1) {
      rho = std::max(rho, std::abs(m(comp[0], comp[0])));
      continue;
    }
    Matrix block(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
      for (Eigen::Index c = 0; c < k; ++c) block(r, c) = m(comp[r], comp[c]);
    }
    rho = std::max(rho, nonneg ? perron_root(block, options) : dominant_modulus(block, options));
  }
  return rho;
}

ContractionReport check_contraction(const LipschitzLayout& layout, int s, int q,
                                    std::optional<double> aggregate_k) {
  ContractionReport r;
  r.companion = companion_matrix(layout);
  r.rho = spectral_radius(r.companion);
  r.assumption1_holds = r.rho < 1.0;
  r.row_sum_bound =
      r.companion.topRows(layout.n).cwiseAbs().rowwise().sum().maxCoeff();
  if (aggregate_k) {
    r.assumption2_bound = *aggregate_k;
  } else {
    double k = 0.0;
    for (const auto* blocks : {&layout.alpha, &layout.beta}) {
      for (const auto& b : *blocks) k = std::max(k, b.cwiseAbs().colwise().sum().maxCoeff());
    }
    r.assumption2_bound = k;
  }
  r.lag_sum = s + q;
  r.assumption2_holds = r.assumption2_bound >= 0.0 && r.assumption2_bound * r.lag_sum < 1.0;
  return r;
}

ContractionReport check_contraction(const ModelSpec& spec, std::optional<double> aggregate_k) {
  const auto layout = lipschitz_layout(spec);
  if (layout) return check_contraction(*layout, spec.lags.s, spec.lags.q, aggregate_k);

  ContractionReport r;
  r.assumption1_supported = false;
  r.lag_sum = spec.lags.s + spec.lags.q;
  r.note = "no analytic Lipschitz layout for family " + std::string(to_string(spec.family));
  if (aggregate_k) {
    r.assumption2_bound = *aggregate_k;
    r.assumption2_holds = *aggregate_k >= 0.0 && *aggregate_k * r.lag_sum < 1.0;
  } else {
    r.assumption2_supported = false;
  }
  return r;
}

}  // namespace gab
