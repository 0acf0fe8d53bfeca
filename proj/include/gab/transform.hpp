#pragma once

#include "gab/model.hpp"

namespace gab {

/// Stick-breaking bijection between R^k and the open region
/// {theta_j > 0, sum_j theta_j < 1}:
///   v_j = 1 / (1 + exp(-u_j)),  theta_j = v_j * prod_{l<j} (1 - v_l).
struct StickBreaking {
  static Vector forward(const Vector& u);
  static Vector inverse(const Vector& theta);
  /// d theta / d u (lower triangular).
  static Matrix jacobian(const Vector& u);
};

}  // namespace gab
