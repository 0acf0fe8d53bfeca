#pragma once

#include <functional>
#include <string>

#include "gab/model.hpp"

namespace gab {

/// Returns f(x) and writes the gradient into `grad`. Non-finite values mark
/// points outside the domain; the line search backs away from them.
using Objective = std::function<double(const Vector& x, Vector& grad)>;

struct BfgsOptions {
  int max_iterations = 500;
  /// Converged when the infinity norm of the gradient drops below this.
  double grad_tol = 1e-7;
  /// Also stop when f changes by less than this (relative) over 5 iterations.
  double f_rel_tol = 1e-15;
  double armijo = 1e-4;
  int max_backtracks = 60;
};

struct BfgsResult {
  Vector x;
  double f = 0.0;
  Vector grad;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

/// Quasi-Newton minimization with inverse-Hessian BFGS updates and Armijo
/// backtracking.
BfgsResult minimize_bfgs(const Objective& f, Vector x0, const BfgsOptions& options = {});

}  // namespace gab
