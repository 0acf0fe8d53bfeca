#include "gab/optimize.hpp"

#include <cmath>

namespace gab {

BfgsResult minimize_bfgs(const Objective& f, Vector x0, const BfgsOptions& opt) {
  const Eigen::Index n = x0.size();
  BfgsResult r;
  r.x = std::move(x0);
  r.grad.resize(n);
  r.f = f(r.x, r.grad);
  if (!std::isfinite(r.f) || !r.grad.allFinite()) {
    r.message = "objective not finite at the starting point";
    return r;
  }
  Matrix h = Matrix::Identity(n, n);
  // Scale the first step so it moves roughly one unit.
  const double g0 = r.grad.lpNorm<Eigen::Infinity>();
  if (g0 > 1.0) h /= g0;

  Vector g_new(n), x_new(n);
  int stall = 0;
  for (r.iterations = 0; r.iterations < opt.max_iterations; ++r.iterations) {
    r.grad_norm = r.grad.lpNorm<Eigen::Infinity>();
    if (r.grad_norm <= opt.grad_tol) {
      r.converged = true;
      r.message = "gradient tolerance reached";
      return r;
    }
    Vector dir = -h * r.grad;
    double slope = r.grad.dot(dir);
    if (!(slope < 0.0)) {
      h.setIdentity();
      dir = -r.grad;
      slope = -r.grad.squaredNorm();
    }
    double step = 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int k = 0; k < opt.max_backtracks; ++k) {
      x_new = r.x + step * dir;
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && g_new.allFinite() && f_new <= r.f + opt.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!h.isIdentity()) {
        h.setIdentity();
        continue;
      }
      r.message = "line search failed";
      return r;
    }
    const Vector s = x_new - r.x;
    const Vector yv = g_new - r.grad;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (r.iterations == 0) h *= sy / yv.squaredNorm();
      const double rho = 1.0 / sy;
      const Vector hy = h * yv;
      h += ((sy + yv.dot(hy)) * rho * rho) * (s * s.transpose()) -
           rho * (hy * s.transpose() + s * hy.transpose());
    }
    r.x = x_new;
    r.grad = g_new;
    const double f_old = r.f;
    r.f = f_new;
    if (std::abs(f_old - f_new) <= opt.f_rel_tol * std::max(1.0, std::abs(f_new))) {
      if (++stall >= 5) {
        r.grad_norm = r.grad.lpNorm<Eigen::Infinity>();
        r.converged = r.grad_norm <= opt.grad_tol;
        r.message = "objective stalled";
        return r;
      }
    } else {
      stall = 0;
    }
  }
  r.grad_norm = r.grad.lpNorm<Eigen::Infinity>();
  r.converged = r.grad_norm <= opt.grad_tol;
  r.message = r.converged ? "gradient tolerance reached" : "iteration cap reached";
  return r;
}

}  // namespace gab
