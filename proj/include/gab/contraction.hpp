#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gab/model.hpp"

namespace gab {

/// Lipschitz coefficients of g: alpha[tau-1](i,j) bounds the effect of y_{j,t-tau}
/// on g_i (tau = 1..q), beta[tau-1](i,j) the effect of p_{j,t-tau} (tau = 1..s).
struct LipschitzLayout {
  int n = 0;
  std::vector<Matrix> alpha;
  std::vector<Matrix> beta;
};

/// Layout implied by a spec. Returns nullopt for families without an analytic
/// layout (Logit11, NonlinearInteractive).
std::optional<LipschitzLayout> lipschitz_layout(const ModelSpec& spec);

/// N*max(s,q) square matrix: first N rows hold alpha^tau + beta^tau for
/// tau = 1..max(s,q), the block below is [I 0].
Matrix companion_matrix(const LipschitzLayout& layout);

struct SpectralOptions {
  double rel_tol = 1e-10;
  std::size_t max_iterations = 200000;
  std::uint64_t seed = 0x5eed5eedULL;
};

/// Largest eigenvalue modulus. Splits M into strongly connected blocks of its
/// sparsity graph (eigenvalues of a block-triangular matrix are those of its
/// diagonal blocks), then runs power iteration per block: shifted with a
/// Collatz-Wielandt bracket for nonnegative blocks, and with a two-step
/// (complex pair) fallback otherwise. Throws NonConvergence at the iteration cap.
double spectral_radius(const Matrix& m, const SpectralOptions& options = {});

struct ContractionReport {
  Matrix companion;
  double rho = 0.0;
  /// False when the family has no analytic Lipschitz layout; the verdicts are then not meaningful.
  bool assumption1_supported = true;
  bool assumption1_holds = false;
  /// Aggregate Lipschitz bound: user supplied, or the largest column sum over
  /// all alpha^tau and beta^tau blocks of the layout.
  double assumption2_bound = 0.0;
  int lag_sum = 2;
  bool assumption2_supported = true;
  bool assumption2_holds = false;
  /// max row sum of the companion's first N rows (sufficient bound on rho).
  double row_sum_bound = 0.0;
  std::string note;
};

ContractionReport check_contraction(const LipschitzLayout& layout, int s, int q,
                                    std::optional<double> aggregate_k = std::nullopt);
ContractionReport check_contraction(const ModelSpec& spec,
                                    std::optional<double> aggregate_k = std::nullopt);

}  // namespace gab
