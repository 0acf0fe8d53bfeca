#include "gab/model.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gab/errors.hpp"

namespace gab {

namespace {

constexpr double kSumTol = 1e-12;
constexpr double kRowTol = 1e-12;
// Evaluation noise allowed before eval_g reports a domain error.
constexpr double kRangeTol = 1e-12;

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool all_nonneg(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0; });
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

SeriesCoefficients scalar_block(double omega, std::vector<double> alpha, std::vector<double> beta,
                                double gamma) {
  SeriesCoefficients c;
  c.omega = omega;
  c.alpha = std::move(alpha);
  c.beta = std::move(beta);
  c.gamma = gamma;
  return c;
}

void require_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw ShapeMismatch(std::string(what) + ": expected " + std::to_string(want) + " entries, got " +
                        std::to_string(got));
  }
}

double finish(double v) {
  if (!(v >= -kRangeTol && v <= 1.0 + kRangeTol)) {
    throw DomainError("probability map left [0,1]: " + fmt_double(v));
  }
  return std::clamp(v, 0.0, 1.0);
}

double logit11(double omega, double alpha, double beta, double y, double p) {
  if (p > 0.0 && p < 1.0) {
    const double x = omega + alpha * y + beta * std::log(p / (1.0 - p));
    return 1.0 / (1.0 + std::exp(-x));
  }
  // Boundary: the odds ratio (1-p)/p is 0 or +inf and pow() keeps the
  // absorbing value exact instead of going through logit(p) = -inf/+inf.
  const double odds = (1.0 - p) / p;
  return 1.0 / (1.0 + std::exp(-omega - alpha * y) * std::pow(odds, beta));
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::LinearUnivariate: return "LinearUnivariate";
    case Family::LinearMultiLag: return "LinearMultiLag";
    case Family::Logit11: return "Logit11";
    case Family::NonlinearScalar: return "NonlinearScalar";
    case Family::Exchangeable: return "Exchangeable";
    case Family::Interactive: return "Interactive";
    case Family::Network: return "Network";
    case Family::NonlinearInteractive: return "NonlinearInteractive";
  }
  return "?";
}

Family family_from_string(std::string_view name) {
  for (Family f : {Family::LinearUnivariate, Family::LinearMultiLag, Family::Logit11,
                   Family::NonlinearScalar, Family::Exchangeable, Family::Interactive,
                   Family::Network, Family::NonlinearInteractive}) {
    if (to_string(f) == name) return f;
  }
  throw ValidationError("unknown model family '" + std::string(name) + "'");
}

std::string_view to_string(ScalarNonlinearity f) {
  return f == ScalarNonlinearity::CubicWeak ? "cubic_weak" : "cubic_strong";
}

ScalarNonlinearity scalar_nonlinearity_from_string(std::string_view name) {
  if (name == "cubic_weak") return ScalarNonlinearity::CubicWeak;
  if (name == "cubic_strong") return ScalarNonlinearity::CubicStrong;
  throw ValidationError("unknown scalar nonlinearity '" + std::string(name) + "'");
}

double scalar_f(ScalarNonlinearity f, double p) {
  if (f == ScalarNonlinearity::CubicWeak) {
    const double d = p - 0.5;
    return 2.0 * p * d * d;
  }
  const double d = p - 5.0 / 6.0;
  return (p + 0.7) * d * d;
}

double scalar_f_lipschitz(ScalarNonlinearity f) {
  // cubic_weak: f'(p) = 6p^2 - 4p + 1/2, largest at p = 1 where it equals 2.5.
  // cubic_strong: f'(p) = (p - 5/6)(3p + 17/30), largest modulus at p = 0: (5/6)(17/30).
  if (f == ScalarNonlinearity::CubicWeak) return 2.5;
  return 6348.0 / 8100.0;
}

std::string_view to_string(OwnTerm f) { return f == OwnTerm::Linear ? "linear" : "product"; }

std::string_view to_string(LocalTerm f) {
  switch (f) {
    case LocalTerm::Zero: return "zero";
    case LocalTerm::Linear: return "linear";
    case LocalTerm::Tanh: return "tanh";
  }
  return "?";
}

std::string_view to_string(AggregateTerm f) {
  switch (f) {
    case AggregateTerm::Zero: return "zero";
    case AggregateTerm::Identity: return "identity";
    case AggregateTerm::Saturating: return "saturating";
    case AggregateTerm::Capped: return "capped";
  }
  return "?";
}

OwnTerm own_term_from_string(std::string_view name) {
  if (name == "linear") return OwnTerm::Linear;
  if (name == "product") return OwnTerm::Product;
  throw ValidationError("unknown own-outcome term '" + std::string(name) + "'");
}

LocalTerm local_term_from_string(std::string_view name) {
  for (LocalTerm f : {LocalTerm::Zero, LocalTerm::Linear, LocalTerm::Tanh}) {
    if (to_string(f) == name) return f;
  }
  throw ValidationError("unknown local interaction term '" + std::string(name) + "'");
}

AggregateTerm aggregate_term_from_string(std::string_view name) {
  for (AggregateTerm f : {AggregateTerm::Zero, AggregateTerm::Identity, AggregateTerm::Saturating,
                          AggregateTerm::Capped}) {
    if (to_string(f) == name) return f;
  }
  throw ValidationError("unknown aggregate term '" + std::string(name) + "'");
}

double local_term_value(LocalTerm f, double weight_y, double weight_p, double ybar, double pbar) {
  switch (f) {
    case LocalTerm::Zero: return 0.0;
    case LocalTerm::Linear: return weight_y * ybar + weight_p * pbar;
    case LocalTerm::Tanh: return weight_y * std::tanh(ybar) + weight_p * std::tanh(pbar);
  }
  return 0.0;
}

double aggregate_term_value(AggregateTerm f, double count, double cap) {
  switch (f) {
    case AggregateTerm::Zero: return 0.0;
    case AggregateTerm::Identity: return count;
    case AggregateTerm::Saturating: return count / (1.0 + count);
    case AggregateTerm::Capped: return std::min(count, cap);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Factories

ModelSpec make_linear(double omega, double alpha, double beta, int n_series) {
  ModelSpec spec;
  spec.family = Family::LinearUnivariate;
  spec.n_series = n_series;
  spec.lags = {1, 1};
  spec.series.assign(static_cast<std::size_t>(std::max(n_series, 0)),
                     scalar_block(omega, {alpha}, {beta}, 0.0));
  return spec;
}

ModelSpec make_linear_multilag(double omega, std::vector<double> alpha, std::vector<double> beta,
                               int n_series) {
  ModelSpec spec;
  spec.family = Family::LinearMultiLag;
  spec.n_series = n_series;
  spec.lags = {static_cast<int>(beta.size()), static_cast<int>(alpha.size())};
  spec.series.assign(static_cast<std::size_t>(std::max(n_series, 0)),
                     scalar_block(omega, std::move(alpha), std::move(beta), 0.0));
  return spec;
}

ModelSpec make_logit(double omega, double alpha, double beta, int n_series) {
  ModelSpec spec = make_linear(omega, alpha, beta, n_series);
  spec.family = Family::Logit11;
  return spec;
}

ModelSpec make_nonlinear_scalar(double omega, double alpha, ScalarNonlinearity f, int n_series) {
  ModelSpec spec;
  spec.family = Family::NonlinearScalar;
  spec.n_series = n_series;
  spec.lags = {1, 1};
  spec.series.assign(static_cast<std::size_t>(std::max(n_series, 0)),
                     scalar_block(omega, {alpha}, {0.0}, 0.0));
  spec.scalar_nonlinearity = f;
  return spec;
}

ModelSpec make_exchangeable(double omega, double gamma, double beta, int n_series) {
  ModelSpec spec;
  spec.family = Family::Exchangeable;
  spec.n_series = n_series;
  spec.lags = {1, 1};
  spec.series.assign(static_cast<std::size_t>(std::max(n_series, 0)),
                     scalar_block(omega, {0.0}, {beta}, gamma));
  return spec;
}

ModelSpec make_interactive(std::span<const double> omega, std::span<const double> alpha,
                           std::span<const double> gamma, std::span<const double> beta) {
  const std::size_t n = omega.size();
  require_size(alpha.size(), n, "alpha");
  require_size(gamma.size(), n, "gamma");
  require_size(beta.size(), n, "beta");
  ModelSpec spec;
  spec.family = Family::Interactive;
  spec.n_series = static_cast<int>(n);
  spec.lags = {1, 1};
  spec.series.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    spec.series.push_back(scalar_block(omega[i], {alpha[i]}, {beta[i]}, gamma[i]));
  }
  return spec;
}

ModelSpec make_interactive(double omega, double alpha, double gamma, double beta, int n_series) {
  const auto n = static_cast<std::size_t>(std::max(n_series, 0));
  std::vector<double> o(n, omega), a(n, alpha), g(n, gamma), b(n, beta);
  return make_interactive(o, a, g, b);
}

ModelSpec make_network(std::span<const double> omega, std::span<const double> alpha,
                       std::span<const double> gamma, std::span<const double> beta,
                       SparseRowMatrix weights) {
  ModelSpec spec = make_interactive(omega, alpha, gamma, beta);
  spec.family = Family::Network;
  spec.network = std::move(weights);
  return spec;
}

ModelSpec make_nonlinear_interactive(InteractiveNonlinearity block, int n_series) {
  ModelSpec spec;
  spec.family = Family::NonlinearInteractive;
  spec.n_series = n_series;
  spec.lags = {static_cast<int>(block.beta_lags.size()), block.own == OwnTerm::Product ? 2 : 1};
  spec.interactive_nonlinearity = std::move(block);
  return spec;
}

SparseRowMatrix to_sparse(const Matrix& dense) {
  SparseRowMatrix out = dense.sparseView();
  out.makeCompressed();
  return out;
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

std::string ValidationReport::summary() const {
  std::string out;
  for (const auto& c : checks) {
    if (c.passed) continue;
    if (!out.empty()) out += "; ";
    out += c.name + ": " + c.detail;
  }
  return out;
}

void ValidationReport::require() const {
  if (!ok()) throw ValidationError("invalid model spec: " + summary());
}

namespace {

class Checker {
 public:
  explicit Checker(ValidationReport& r) : r_(r) {}
  bool operator()(std::string name, bool passed, std::string detail = {}) {
    r_.checks.push_back({std::move(name), passed, passed ? std::string() : std::move(detail)});
    return passed;
  }

 private:
  ValidationReport& r_;
};

void check_series_blocks(const ModelSpec& spec, Checker& check) {
  const auto n = static_cast<std::size_t>(spec.n_series);
  if (!check("series_count", spec.series.size() == n,
             "expected " + std::to_string(n) + " parameter blocks, got " +
                 std::to_string(spec.series.size()))) {
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = spec.series[i];
    const std::string tag = "series[" + std::to_string(i) + "]";
    check(tag + ".alpha_size", c.alpha.size() == static_cast<std::size_t>(spec.lags.q),
          "alpha needs q = " + std::to_string(spec.lags.q) + " entries");
    check(tag + ".beta_size", c.beta.size() == static_cast<std::size_t>(spec.lags.s),
          "beta needs s = " + std::to_string(spec.lags.s) + " entries");
    check(tag + ".finite",
          std::isfinite(c.omega) && std::isfinite(c.gamma) && all_finite(c.alpha) && all_finite(c.beta),
          "non-finite coefficient");
  }
}

void check_linear_bounds(const ModelSpec& spec, Checker& check, bool with_gamma) {
  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const auto& c = spec.series[i];
    const std::string tag = "series[" + std::to_string(i) + "]";
    const bool nonneg = c.omega >= 0.0 && all_nonneg(c.alpha) && all_nonneg(c.beta) &&
                        (!with_gamma || c.gamma >= 0.0);
    check(tag + ".nonnegative", nonneg, "coefficients must be nonnegative");
    const double total = c.omega + sum(c.alpha) + sum(c.beta) + (with_gamma ? c.gamma : 0.0);
    check(tag + ".sum_le_1", total <= 1.0 + kSumTol,
          "coefficient sum " + fmt_double(total) + " exceeds 1");
    if (!with_gamma) {
      check(tag + ".no_gamma", c.gamma == 0.0, "gamma is not used by this family");
    }
  }
}

void check_single_lag(const ModelSpec& spec, Checker& check) {
  check("lags", spec.lags.s == 1 && spec.lags.q == 1, "family requires s = q = 1");
}

void validate_nonlinear_interactive(const ModelSpec& spec, Checker& check) {
  if (!check("nonlinear_block", spec.interactive_nonlinearity.has_value(),
             "missing nonlinear interactive parameter block")) {
    return;
  }
  const auto& b = *spec.interactive_nonlinearity;
  const auto n = static_cast<std::size_t>(spec.n_series);
  const bool sizes = b.c.size() == n && b.a.size() == n && b.local_y.size() == n &&
                     b.local_p.size() == n && b.gamma.size() == n;
  if (!check("block_sizes", sizes, "c, a, local_y, local_p, gamma need N entries")) return;
  check("beta_lags", static_cast<int>(b.beta_lags.size()) == spec.lags.s && spec.lags.s >= 1,
        "beta_lags must have s >= 1 entries");
  check("outcome_lags", spec.lags.q == (b.own == OwnTerm::Product ? 2 : 1),
        "q must be 2 for the product own term and 1 otherwise");
  check("kappa", std::isfinite(b.kappa) && b.kappa > 0.0, "kappa must be positive");
  check("cap", b.aggregate != AggregateTerm::Capped || (std::isfinite(b.cap) && b.cap > 0.0),
        "cap must be positive");
  const bool fin = all_finite(b.c) && all_finite(b.a) && all_finite(b.local_y) &&
                   all_finite(b.local_p) && all_finite(b.gamma) && all_finite(b.beta_lags);
  if (!check("finite", fin, "non-finite coefficient")) return;
  const bool nonneg = all_nonneg(b.c) && all_nonneg(b.a) && all_nonneg(b.local_y) &&
                      all_nonneg(b.local_p) && all_nonneg(b.gamma) && all_nonneg(b.beta_lags);
  if (!check("nonnegative", nonneg, "coefficients must be nonnegative")) return;

  // Every term is nonnegative and increasing in its arguments, so the supremum
  // of g_i is attained with all outcomes and probabilities at 1.
  const double nn = static_cast<double>(n);
  const double sup_agg = aggregate_term_value(b.aggregate, nn, b.cap);
  const double scale = std::pow(nn, -b.kappa);
  const double beta_sum = sum(b.beta_lags);
  double worst = 0.0;
  std::size_t worst_i = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sup = b.c[i] / nn + scale * b.a[i] + beta_sum +
                       local_term_value(b.local, b.local_y[i], b.local_p[i], 1.0, 1.0) +
                       b.gamma[i] / nn * sup_agg;
    if (sup > worst) {
      worst = sup;
      worst_i = i;
    }
  }
  check("sup_le_1", worst <= 1.0 + kSumTol,
        "series " + std::to_string(worst_i) + " can reach probability " + fmt_double(worst));
}

}  // namespace

ValidationReport validate_spec(const ModelSpec& spec) {
  ValidationReport report;
  Checker check(report);
  if (!check("n_series", spec.n_series >= 1, "N must be positive")) return report;
  if (!check("lag_orders", spec.lags.s >= 1 && spec.lags.q >= 1, "s and q must be >= 1")) {
    return report;
  }

  switch (spec.family) {
    case Family::LinearUnivariate:
      check_single_lag(spec, check);
      check_series_blocks(spec, check);
      if (report.ok()) check_linear_bounds(spec, check, false);
      break;
    case Family::LinearMultiLag:
      check_series_blocks(spec, check);
      if (report.ok()) check_linear_bounds(spec, check, false);
      break;
    case Family::Logit11:
      check_single_lag(spec, check);
      check_series_blocks(spec, check);
      break;
    case Family::NonlinearScalar: {
      check_single_lag(spec, check);
      check_series_blocks(spec, check);
      if (!check("catalog", spec.scalar_nonlinearity.has_value(), "missing nonlinearity id")) break;
      if (!report.ok()) break;
      // Dense grid over p in [0,1] and y in {0,1}.
      constexpr int kGrid = 2000;
      for (std::size_t i = 0; i < spec.series.size(); ++i) {
        const auto& c = spec.series[i];
        double lo = 1.0, hi = 0.0;
        for (int y = 0; y <= 1; ++y) {
          for (int k = 0; k <= kGrid; ++k) {
            const double p = static_cast<double>(k) / kGrid;
            const double g = c.omega + c.alpha[0] * y + scalar_f(*spec.scalar_nonlinearity, p);
            lo = std::min(lo, g);
            hi = std::max(hi, g);
          }
        }
        check("series[" + std::to_string(i) + "].range", lo >= 0.0 && hi <= 1.0,
              "g ranges over [" + fmt_double(lo) + ", " + fmt_double(hi) + "] on the grid");
      }
      break;
    }
    case Family::Exchangeable: {
      check_single_lag(spec, check);
      check_series_blocks(spec, check);
      if (!report.ok()) break;
      check_linear_bounds(spec, check, true);
      const auto& c0 = spec.series.front();
      bool same = true;
      for (const auto& c : spec.series) {
        same = same && c.omega == c0.omega && c.gamma == c0.gamma && c.alpha == c0.alpha &&
               c.beta == c0.beta;
      }
      check("homogeneous", same, "exchangeable parameters must be identical across series");
      check("no_alpha", c0.alpha[0] == 0.0, "exchangeable family has no own-outcome term");
      break;
    }
    case Family::Interactive:
      check_single_lag(spec, check);
      check_series_blocks(spec, check);
      if (report.ok()) check_linear_bounds(spec, check, true);
      break;
    case Family::Network: {
      check_single_lag(spec, check);
      check_series_blocks(spec, check);
      if (report.ok()) check_linear_bounds(spec, check, true);
      if (!check("network_present", spec.network.has_value(), "missing weight matrix W")) break;
      const auto& w = *spec.network;
      if (!check("network_shape", w.rows() == spec.n_series && w.cols() == spec.n_series,
                 "W must be N x N")) {
        break;
      }
      for (Eigen::Index r = 0; r < w.outerSize(); ++r) {
        double row = 0.0;
        bool nonneg = true;
        for (SparseRowMatrix::InnerIterator it(w, r); it; ++it) {
          row += it.value();
          nonneg = nonneg && it.value() >= 0.0 && std::isfinite(it.value());
        }
        const std::string tag = "W.row[" + std::to_string(r) + "]";
        check(tag + ".nonnegative", nonneg, "negative or non-finite weight");
        check(tag + ".sum", std::abs(row - 1.0) <= kRowTol,
              "row sums to " + fmt_double(row) + ", not 1");
      }
      break;
    }
    case Family::NonlinearInteractive:
      validate_nonlinear_interactive(spec, check);
      break;
  }
  return report;
}

// ---------------------------------------------------------------------------
// PanelState

PanelState::PanelState(int n_series, int p_lags, int y_lags)
    : n_(n_series), s_(p_lags), q_(y_lags) {
  if (n_ < 1 || s_ < 1 || q_ < 1) {
    throw ValidationError("panel state needs N, s, q >= 1");
  }
  p_.assign(static_cast<std::size_t>(n_ * s_), 0.0);
  y_.assign(static_cast<std::size_t>(n_ * q_), 0);
}

std::span<const double> PanelState::p_lag(int tau) const {
  const int k = slot(p_head_, tau, s_);
  return {p_.data() + static_cast<std::size_t>(k * n_), static_cast<std::size_t>(n_)};
}

std::span<const std::uint8_t> PanelState::y_lag(int tau) const {
  const int k = slot(y_head_, tau, q_);
  return {y_.data() + static_cast<std::size_t>(k * n_), static_cast<std::size_t>(n_)};
}

void PanelState::push(std::span<const double> p, std::span<const std::uint8_t> y) {
  require_size(p.size(), static_cast<std::size_t>(n_), "probability vector");
  require_size(y.size(), static_cast<std::size_t>(n_), "outcome vector");
  p_head_ = (p_head_ + s_ - 1) % s_;
  y_head_ = (y_head_ + q_ - 1) % q_;
  std::copy(p.begin(), p.end(), p_.begin() + p_head_ * n_);
  std::copy(y.begin(), y.end(), y_.begin() + y_head_ * n_);
}

void PanelState::fill(std::span<const double> p, std::span<const std::uint8_t> y) {
  for (int tau = 1; tau <= s_; ++tau) set_p_lag(tau, p);
  for (int tau = 1; tau <= q_; ++tau) set_y_lag(tau, y);
}

void PanelState::set_p_lag(int tau, std::span<const double> p) {
  require_size(p.size(), static_cast<std::size_t>(n_), "probability vector");
  if (tau < 1 || tau > s_) throw ValidationError("probability lag out of range");
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("probability outside [0,1]");
  }
  std::copy(p.begin(), p.end(), p_.begin() + slot(p_head_, tau, s_) * n_);
}

void PanelState::set_y_lag(int tau, std::span<const std::uint8_t> y) {
  require_size(y.size(), static_cast<std::size_t>(n_), "outcome vector");
  if (tau < 1 || tau > q_) throw ValidationError("outcome lag out of range");
  for (auto v : y) {
    if (v > 1) throw ValidationError("outcome must be 0 or 1");
  }
  std::copy(y.begin(), y.end(), y_.begin() + slot(y_head_, tau, q_) * n_);
}

PanelState make_state(const ModelSpec& spec) {
  return PanelState(spec.n_series, spec.lags.s, spec.lags.q);
}

// ---------------------------------------------------------------------------
// g

void eval_g(const ModelSpec& spec, const PanelState& state, std::span<double> out) {
  const int n = spec.n_series;
  if (state.n_series() != n || state.p_lags() != spec.lags.s || state.y_lags() != spec.lags.q) {
    throw ShapeMismatch("panel state does not match the model's N, s, q");
  }
  require_size(out.size(), static_cast<std::size_t>(n), "output vector");
  const auto p1 = state.p_lag(1);
  const auto y1 = state.y_lag(1);
  const double nn = static_cast<double>(n);

  switch (spec.family) {
    case Family::LinearUnivariate:
    case Family::LinearMultiLag: {
      for (int i = 0; i < n; ++i) {
        const auto& c = spec.series[static_cast<std::size_t>(i)];
        double v = c.omega;
        for (int tau = 1; tau <= spec.lags.q; ++tau) {
          v += c.alpha[static_cast<std::size_t>(tau - 1)] * state.y_lag(tau)[static_cast<std::size_t>(i)];
        }
        for (int tau = 1; tau <= spec.lags.s; ++tau) {
          v += c.beta[static_cast<std::size_t>(tau - 1)] * state.p_lag(tau)[static_cast<std::size_t>(i)];
        }
        out[static_cast<std::size_t>(i)] = finish(v);
      }
      return;
    }
    case Family::Logit11: {
      for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const auto& c = spec.series[k];
        out[k] = finish(logit11(c.omega, c.alpha[0], c.beta[0], y1[k], p1[k]));
      }
      return;
    }
    case Family::NonlinearScalar: {
      for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const auto& c = spec.series[k];
        out[k] = finish(c.omega + c.alpha[0] * y1[k] + scalar_f(*spec.scalar_nonlinearity, p1[k]));
      }
      return;
    }
    case Family::Exchangeable:
    case Family::Interactive: {
      double count = 0.0;
      for (auto v : y1) count += v;
      const double ybar = count / nn;
      for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const auto& c = spec.series[k];
        out[k] = finish(c.omega + c.alpha[0] * y1[k] + c.gamma * ybar + c.beta[0] * p1[k]);
      }
      return;
    }
    case Family::Network: {
      const auto& w = *spec.network;
      for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        double wy = 0.0;
        for (SparseRowMatrix::InnerIterator it(w, i); it; ++it) {
          wy += it.value() * y1[static_cast<std::size_t>(it.col())];
        }
        const auto& c = spec.series[k];
        out[k] = finish(c.omega + c.alpha[0] * y1[k] + c.gamma * wy + c.beta[0] * p1[k]);
      }
      return;
    }
    case Family::NonlinearInteractive: {
      const auto& b = *spec.interactive_nonlinearity;
      double count = 0.0, psum = 0.0;
      for (int i = 0; i < n; ++i) {
        count += y1[static_cast<std::size_t>(i)];
        psum += p1[static_cast<std::size_t>(i)];
      }
      const double ybar = count / nn, pbar = psum / nn;
      const double agg = aggregate_term_value(b.aggregate, count, b.cap);
      const double scale = std::pow(nn, -b.kappa);
      const bool product = b.own == OwnTerm::Product;
      for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        double own = y1[k];
        if (product) own *= state.y_lag(2)[k];
        double v = b.c[k] / nn + scale * b.a[k] * own;
        for (int tau = 1; tau <= spec.lags.s; ++tau) {
          v += b.beta_lags[static_cast<std::size_t>(tau - 1)] * state.p_lag(tau)[k];
        }
        v += local_term_value(b.local, b.local_y[k], b.local_p[k], ybar, pbar);
        v += b.gamma[k] / nn * agg;
        out[k] = finish(v);
      }
      return;
    }
  }
}

std::vector<double> eval_g(const ModelSpec& spec, const PanelState& state) {
  std::vector<double> out(static_cast<std::size_t>(spec.n_series));
  eval_g(spec, state, out);
  return out;
}

// ---------------------------------------------------------------------------
// Means

MeanReport unconditional_mean(const ModelSpec& spec) {
  validate_spec(spec).require();
  const int n = spec.n_series;
  MeanReport r;
  r.per_series_mean.resize(n);

  switch (spec.family) {
    case Family::LinearUnivariate:
    case Family::LinearMultiLag:
    case Family::Exchangeable: {
      for (int i = 0; i < n; ++i) {
        const auto& c = spec.series[static_cast<std::size_t>(i)];
        const double denom = 1.0 - sum(c.alpha) - sum(c.beta) - c.gamma;
        if (!(denom > 0.0)) {
          throw DegenerateMean("persistence sum reaches 1 for series " + std::to_string(i) +
                               "; the stationary mean is not unique");
        }
        r.per_series_mean[i] = c.omega / denom;
      }
      r.method = MeanMethod::ClosedForm;
      break;
    }
    case Family::Interactive: {
      // mu_i = (omega_i + gamma_i mubar) / (1 - alpha_i - beta_i) with mubar = mean(mu).
      double a = 0.0, b = 0.0;
      std::vector<double> denom(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        const auto& c = spec.series[static_cast<std::size_t>(i)];
        const double d = 1.0 - c.alpha[0] - c.beta[0];
        if (!(d > 0.0)) {
          throw DegenerateMean("alpha + beta reaches 1 for series " + std::to_string(i));
        }
        denom[static_cast<std::size_t>(i)] = d;
        a += c.omega / d;
        b += c.gamma / d;
      }
      a /= n;
      b /= n;
      if (!(b < 1.0)) {
        throw DegenerateMean("average interaction ratio " + fmt_double(b) + " is not below 1");
      }
      const double mubar = a / (1.0 - b);
      for (int i = 0; i < n; ++i) {
        const auto& c = spec.series[static_cast<std::size_t>(i)];
        r.per_series_mean[i] = (c.omega + c.gamma * mubar) / denom[static_cast<std::size_t>(i)];
      }
      r.method = MeanMethod::ClosedForm;
      break;
    }
    case Family::Network: {
      Matrix system = -Matrix(*spec.network);
      Vector omega(n);
      for (int i = 0; i < n; ++i) {
        const auto& c = spec.series[static_cast<std::size_t>(i)];
        system.row(i) *= c.gamma;
        system(i, i) += 1.0 - c.alpha[0] - c.beta[0];
        omega[i] = c.omega;
      }
      Eigen::FullPivLU<Matrix> lu(system);
      if (!lu.isInvertible()) {
        throw DegenerateMean("network mean system I - A - Gamma W is singular");
      }
      r.per_series_mean = lu.solve(omega);
      const double resid = (system * r.per_series_mean - omega).lpNorm<Eigen::Infinity>();
      if (!(resid < 1e-10)) {
        throw DegenerateMean("network mean solve residual " + fmt_double(resid) + " is too large");
      }
      r.method = MeanMethod::LinearSolve;
      break;
    }
    case Family::Logit11:
    case Family::NonlinearScalar:
    case Family::NonlinearInteractive:
      throw ValidationError(std::string("no closed-form mean for family ") +
                            std::string(to_string(spec.family)));
  }

  for (int i = 0; i < n; ++i) {
    const double m = r.per_series_mean[i];
    if (!(m >= -1e-12 && m <= 1.0 + 1e-12)) {
      throw DegenerateMean("mean of series " + std::to_string(i) + " is " + fmt_double(m) +
                           ", outside [0,1]");
    }
  }
  r.total_mean = r.per_series_mean.sum();
  return r;
}

}  // namespace gab
