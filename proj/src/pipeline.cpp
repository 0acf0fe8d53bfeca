#include "gab/pipeline.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "gab/errors.hpp"

namespace gab {

namespace {

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t k : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
  }
  const int month = std::stoi(s.substr(5, 2));
  const int day = std::stoi(s.substr(8, 2));
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

void check_dates(const WideTable& t, const std::string& what) {
  for (std::size_t r = 0; r < t.index.size(); ++r) {
    if (!is_iso_date(t.index[r])) {
      throw ParseError(what + ": row " + std::to_string(r + 2) + ": '" + t.index[r] + "' is not a YYYY-MM-DD date");
    }
    if (r > 0 && !(t.index[r - 1] < t.index[r])) {
      throw ParseError(what + ": row " + std::to_string(r + 2) + ": dates must be strictly increasing");
    }
  }
}

}  // namespace

LoadedPanels load_panels(const WideTable& returns_csv, const WideTable& factors_csv) {
  check_dates(returns_csv, "returns");
  check_dates(factors_csv, "factors");
  if (factors_csv.columns.empty() || factors_csv.columns[0] != "rf") {
    throw ParseError("factors: second column must be 'rf'");
  }
  std::map<std::string, Eigen::Index> factor_row;
  for (std::size_t r = 0; r < factors_csv.index.size(); ++r) {
    factor_row.emplace(factors_csv.index[r], static_cast<Eigen::Index>(r));
  }
  std::vector<Eigen::Index> ret_rows, fac_rows;
  LoadedPanels out;
  std::vector<std::string> dates;
  for (std::size_t r = 0; r < returns_csv.index.size(); ++r) {
    auto it = factor_row.find(returns_csv.index[r]);
    if (it == factor_row.end()) {
      ++out.report.dates_dropped_returns;
      continue;
    }
    ret_rows.push_back(static_cast<Eigen::Index>(r));
    fac_rows.push_back(it->second);
    dates.push_back(returns_csv.index[r]);
  }
  const auto T = static_cast<Eigen::Index>(ret_rows.size());
  out.report.dates_kept = T;
  out.report.dates_dropped_factors = static_cast<long>(factors_csv.index.size()) - T;
  if (T == 0) throw ValidationError("returns and factors share no dates");

  const auto K = static_cast<Eigen::Index>(factors_csv.columns.size()) - 1;
  auto& fs = out.factors;
  fs.dates = dates;
  fs.names.assign(factors_csv.columns.begin() + 1, factors_csv.columns.end());
  fs.factors.resize(T, K);
  fs.risk_free.resize(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index k = 0; k <= K; ++k) {
      const double v = factors_csv.values(fac_rows[static_cast<std::size_t>(t)], k);
      if (std::isnan(v)) {
        throw ParseError("factors: missing value on " + dates[static_cast<std::size_t>(t)] + " in column '" +
                         factors_csv.columns[static_cast<std::size_t>(k)] + "'");
      }
      if (k == 0) {
        fs.risk_free[t] = v;
      } else {
        fs.factors(t, k - 1) = v;
      }
    }
  }

  auto& rp = out.returns;
  rp.dates = dates;
  rp.risk_free = fs.risk_free;
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < returns_csv.columns.size(); ++j) {
    bool complete = true;
    for (Eigen::Index t = 0; t < T && complete; ++t) {
      complete = !std::isnan(returns_csv.values(ret_rows[static_cast<std::size_t>(t)], static_cast<Eigen::Index>(j)));
    }
    if (complete) {
      keep.push_back(static_cast<Eigen::Index>(j));
      rp.ids.push_back(returns_csv.columns[j]);
    } else {
      out.report.rejected_series.push_back(returns_csv.columns[j]);
    }
  }
  rp.returns.resize(static_cast<Eigen::Index>(keep.size()), T);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (Eigen::Index t = 0; t < T; ++t) {
      rp.returns(static_cast<Eigen::Index>(i), t) = returns_csv.values(ret_rows[static_cast<std::size_t>(t)], keep[i]);
    }
  }
  return out;
}

LoadedPanels load_panels(const std::string& returns_path, const std::string& factors_path) {
  return load_panels(read_wide_csv(returns_path), read_wide_csv(factors_path));
}

int split_index(const std::vector<std::string>& dates, const std::string& split_date) {
  if (dates.empty()) throw ValidationError("cannot split an empty panel");
  if (split_date < dates.front()) {
    throw ValidationError("split date " + split_date + " precedes the first date " + dates.front() +
                          "; the estimation window would be empty");
  }
  if (split_date > dates.back()) {
    throw ValidationError("split date " + split_date + " is after the last date " + dates.back());
  }
  const auto it = std::upper_bound(dates.begin(), dates.end(), split_date);
  return static_cast<int>(it - dates.begin());
}

Matrix ols_residuals(const ReturnsPanel& returns, const FactorSeries& factors, int t_est) {
  const Eigen::Index T = returns.returns.cols();
  const Eigen::Index K = factors.factors.cols();
  if (factors.factors.rows() != T || returns.risk_free.size() != T) {
    throw ShapeMismatch("returns and factors are not aligned");
  }
  if (t_est < 1 || t_est > T) throw ValidationError("estimation window outside the sample");
  if (t_est <= K + 1) {
    throw ValidationError("estimation window has " + std::to_string(t_est) + " periods; need more than " +
                          std::to_string(K + 1));
  }
  Matrix design(T, K + 1);
  design.col(0).setOnes();
  design.rightCols(K) = factors.factors;
  const Matrix est = design.topRows(t_est);
  Eigen::ColPivHouseholderQR<Matrix> qr(est);
  if (qr.rank() < K + 1) {
    throw RankDeficient("factor design has rank " + std::to_string(qr.rank()) + " < " + std::to_string(K + 1));
  }
  const Matrix excess = returns.returns.rowwise() - returns.risk_free.transpose();  // N x T
  const Matrix coef = qr.solve(excess.leftCols(t_est).transpose());              // (K+1) x N
  return excess - (design * coef).transpose();
}

BinaryPanel threshold_binary(const Matrix& residuals, double level, int t_est, std::vector<std::string> dates,
                             std::vector<std::string> ids) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0, 1)");
  const Eigen::Index N = residuals.rows(), T = residuals.cols();
  if (t_est < 1) throw ValidationError("estimation window is empty");
  if (t_est > T) throw ValidationError("estimation window longer than the sample");
  const auto k = static_cast<Eigen::Index>(
      std::clamp(std::ceil(level * t_est - 1e-9), 1.0, static_cast<double>(t_est)));
  BinaryPanel out;
  out.split = t_est;
  out.dates = std::move(dates);
  out.ids = std::move(ids);
  if (out.dates.empty()) {
    for (Eigen::Index t = 0; t < T; ++t) out.dates.push_back(std::to_string(t));
  }
  if (out.ids.empty()) {
    for (Eigen::Index i = 0; i < N; ++i) out.ids.push_back("s" + std::to_string(i));
  }
  out.thresholds.resize(N);
  out.y.resize(N, T);
  std::vector<double> window(static_cast<std::size_t>(t_est));
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index t = 0; t < t_est; ++t) window[static_cast<std::size_t>(t)] = residuals(i, t);
    std::nth_element(window.begin(), window.begin() + (k - 1), window.end());
    const double thr = window[static_cast<std::size_t>(k - 1)];
    out.thresholds[i] = thr;
    for (Eigen::Index t = 0; t < T; ++t) out.y(i, t) = residuals(i, t) < thr ? 1 : 0;
  }
  return out;
}

std::pair<BinaryPanel, BinaryPanel> split(const BinaryPanel& panel, const std::string& date) {
  const int cut = split_index(panel.dates, date);
  BinaryPanel est = panel, hold = panel;
  est.dates.assign(panel.dates.begin(), panel.dates.begin() + cut);
  hold.dates.assign(panel.dates.begin() + cut, panel.dates.end());
  est.y = panel.y.leftCols(cut);
  hold.y = panel.y.rightCols(panel.y.cols() - cut);
  est.split = cut;
  hold.split = 0;
  return {est, hold};
}

PipelineResult run_pipeline(const std::string& returns_path, const std::string& factors_path,
                            const std::string& split_date, double level) {
  auto loaded = load_panels(returns_path, factors_path);
  if (loaded.returns.ids.empty()) throw ValidationError("no series without gaps remain");
  const int t_est = split_index(loaded.returns.dates, split_date);
  PipelineResult r;
  r.residuals = ols_residuals(loaded.returns, loaded.factors, t_est);
  r.panel = threshold_binary(r.residuals, level, t_est, loaded.returns.dates, loaded.returns.ids);
  r.report = std::move(loaded.report);
  return r;
}

WideTable binary_panel_table(const BinaryPanel& panel) {
  WideTable t;
  t.index_name = "date";
  t.index = panel.dates;
  t.columns = panel.ids;
  t.values = panel.y.transpose().cast<double>();
  return t;
}

WideTable thresholds_table(const BinaryPanel& panel) {
  WideTable t;
  t.index_name = "id";
  t.index = panel.ids;
  t.columns = {"threshold"};
  t.values = panel.thresholds;
  return t;
}

}  // namespace gab
