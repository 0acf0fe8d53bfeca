#include "gab/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "gab/errors.hpp"

namespace gab {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  cells.push_back(cell);
  for (auto& c : cells) {
    const auto b = c.find_first_not_of(" \t");
    const auto e = c.find_last_not_of(" \t");
    c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
  }
  return cells;
}

double parse_cell(const std::string& cell, const std::string& source, std::size_t line, std::size_t col) {
  if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                     ": not a number: '" + cell + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

WideTable parse_wide_csv(std::istream& in, const std::string& source) {
  WideTable table;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_line(line);
    if (table.columns.empty() && table.index_name.empty()) {
      if (cells.size() < 2) throw ParseError(source + ":" + std::to_string(line_no) + ": header needs at least two columns");
      table.index_name = cells[0];
      table.columns.assign(cells.begin() + 1, cells.end());
      continue;
    }
    if (cells.size() != table.columns.size() + 1) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table.columns.size() + 1) + " cells, found " +
                       std::to_string(cells.size()));
    }
    table.index.push_back(cells[0]);
    std::vector<double> row(table.columns.size());
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = parse_cell(cells[j + 1], source, line_no, j + 2);
    rows.push_back(std::move(row));
  }
  if (table.index_name.empty()) throw ParseError(source + ": empty file");
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < rows[r].size(); ++j) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = rows[r][j];
    }
  }
  return table;
}

WideTable read_wide_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return parse_wide_csv(in, path);
}

void write_wide_csv(std::ostream& out, const WideTable& table) {
  out << table.index_name;
  for (const auto& c : table.columns) out << ',' << c;
  out << '\n';
  for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
    out << table.index[static_cast<std::size_t>(r)];
    for (Eigen::Index j = 0; j < table.values.cols(); ++j) out << ',' << format_double(table.values(r, j));
    out << '\n';
  }
}

void write_wide_csv(const std::string& path, const WideTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  write_wide_csv(out, table);
  if (!out) throw ValidationError("write failed for " + path);
}

WideTable panel_table(const Matrix& panel, const std::string& prefix) {
  WideTable t;
  t.index_name = "t";
  for (Eigen::Index i = 0; i < panel.rows(); ++i) t.columns.push_back(prefix + std::to_string(i));
  for (Eigen::Index c = 0; c < panel.cols(); ++c) t.index.push_back(std::to_string(c));
  t.values = panel.transpose();
  return t;
}

BinaryMatrix binary_from_table(const WideTable& table) {
  BinaryMatrix y(table.values.cols(), table.values.rows());
  for (Eigen::Index t = 0; t < table.values.rows(); ++t) {
    for (Eigen::Index i = 0; i < table.values.cols(); ++i) {
      const double v = table.values(t, i);
      if (v != 0.0 && v != 1.0) {
        throw ParseError("binary panel cell (row " + std::to_string(t + 1) + ", column '" +
                         table.columns[static_cast<std::size_t>(i)] + "') is not 0 or 1");
      }
      y(i, t) = static_cast<std::uint8_t>(v);
    }
  }
  return y;
}

}  // namespace gab
