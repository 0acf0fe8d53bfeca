#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gab/csv.hpp"
#include "gab/model.hpp"

namespace gab {

/// Decimal returns, one row per series. Dates are ISO strings in ascending order.
struct ReturnsPanel {
  std::vector<std::string> dates;
  std::vector<std::string> ids;
  Matrix returns;  ///< N x T
  Vector risk_free;
};

struct FactorSeries {
  std::vector<std::string> dates;
  std::vector<std::string> names;
  Matrix factors;  ///< T x K
  Vector risk_free;
};

struct LoadReport {
  std::vector<std::string> rejected_series;  ///< series with missing cells
  long dates_dropped_returns = 0;            ///< not present in the factors file
  long dates_dropped_factors = 0;            ///< not present in the returns file
  long dates_kept = 0;
};

struct LoadedPanels {
  ReturnsPanel returns;
  FactorSeries factors;
  LoadReport report;
};

/// Inner join on date. Series with any missing cell in the joined span are
/// dropped and listed in the report; a missing factor cell is a parse error.
LoadedPanels load_panels(const WideTable& returns_csv, const WideTable& factors_csv);
LoadedPanels load_panels(const std::string& returns_path, const std::string& factors_path);

/// Number of dates on or before `split_date`. Throws ValidationError when the
/// date falls outside the span or leaves the estimation window empty.
int split_index(const std::vector<std::string>& dates, const std::string& split_date);

/// Residuals of (return - rf) on an intercept and the factors. Coefficients are
/// estimated on the first `t_est` periods and applied to all periods.
Matrix ols_residuals(const ReturnsPanel& returns, const FactorSeries& factors, int t_est);

struct BinaryPanel {
  std::vector<std::string> dates;
  std::vector<std::string> ids;
  BinaryMatrix y;     ///< N x T
  Vector thresholds;  ///< per series
  int split = 0;      ///< periods in the estimation window
};

/// Per-series threshold = k-th smallest residual of the estimation window,
/// k = ceil(level * t_est); y = 1 strictly below the threshold.
BinaryPanel threshold_binary(const Matrix& residuals, double level, int t_est,
                             std::vector<std::string> dates = {}, std::vector<std::string> ids = {});

/// Estimation part holds dates <= `date`.
std::pair<BinaryPanel, BinaryPanel> split(const BinaryPanel& panel, const std::string& date);

struct PipelineResult {
  BinaryPanel panel;
  LoadReport report;
  Matrix residuals;
};

PipelineResult run_pipeline(const std::string& returns_path, const std::string& factors_path,
                            const std::string& split_date, double level = 0.05);

/// `date,<id>...` with 0/1 cells.
WideTable binary_panel_table(const BinaryPanel& panel);
/// `id,threshold`.
WideTable thresholds_table(const BinaryPanel& panel);

}  // namespace gab
