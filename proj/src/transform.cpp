#include "gab/transform.hpp"

#include <cmath>

#include "gab/errors.hpp"

namespace gab {

namespace {

double sigmoid(double u) {
  return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
}

}  // namespace

Vector StickBreaking::forward(const Vector& u) {
  Vector theta(u.size());
  double remaining = 1.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    const double v = sigmoid(u[j]);
    theta[j] = v * remaining;
    remaining *= 1.0 - v;
  }
  return theta;
}

Vector StickBreaking::inverse(const Vector& theta) {
  Vector u(theta.size());
  double remaining = 1.0;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if (!(theta[j] > 0.0) || !(theta[j] < remaining)) {
      throw DomainError("stick-breaking inverse needs positive coordinates with sum below 1");
    }
    const double v = theta[j] / remaining;
    u[j] = std::log(v) - std::log1p(-v);
    remaining -= theta[j];
  }
  return u;
}

Matrix StickBreaking::jacobian(const Vector& u) {
  const Eigen::Index k = u.size();
  const Vector theta = forward(u);
  Matrix jac = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double vi = sigmoid(u[i]);
    jac(i, i) = theta[i] * (1.0 - vi);
    for (Eigen::Index l = 0; l < i; ++l) jac(i, l) = -theta[i] * sigmoid(u[l]);
  }
  return jac;
}

}  // namespace gab
