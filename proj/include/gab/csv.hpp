#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gab/model.hpp"

namespace gab {

/// Wide table: one row per period, first column a label (date or t).
struct WideTable {
  std::string index_name;
  std::vector<std::string> index;
  std::vector<std::string> columns;
  Matrix values;  ///< index.size() x columns.size(); empty cells read as NaN
};

/// Parses comma-separated text. Errors carry `source`, line and column.
/// Empty cells and NA / NaN become NaN.
WideTable parse_wide_csv(std::istream& in, const std::string& source);
WideTable read_wide_csv(const std::string& path);

/// Numbers are written with %.17g so the file round-trips exactly.
void write_wide_csv(std::ostream& out, const WideTable& table);
void write_wide_csv(const std::string& path, const WideTable& table);

/// Table with rows t = 0..T-1 and one column per series from an N x T panel.
WideTable panel_table(const Matrix& panel_n_by_t, const std::string& prefix = "s");

/// Parses a 0/1 panel stored as a wide table (rows periods, columns series).
BinaryMatrix binary_from_table(const WideTable& table);

std::string format_double(double v);

}  // namespace gab
