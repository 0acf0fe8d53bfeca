#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gab/csv.hpp"
#include "gab/errors.hpp"
#include "gab/pipeline.hpp"

using namespace gab;
using Catch::Approx;

namespace {

WideTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_wide_csv(in, "inline");
}

std::string date(int day) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "2020-%02d-%02d", 1 + (day / 28), 1 + day % 28);
  return buf;
}

// Returns and factors for T dates with K factors and N series, returns = rf + loadings * f + noise.
std::pair<WideTable, WideTable> synthetic(int n, int t, int k, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  WideTable f, r;
  f.index_name = r.index_name = "date";
  f.columns.push_back("rf");
  for (int j = 0; j < k; ++j) f.columns.push_back("f" + std::to_string(j));
  for (int i = 0; i < n; ++i) r.columns.push_back("id" + std::to_string(i));
  f.values.resize(t, k + 1);
  r.values.resize(t, n);
  Matrix load(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) load(i, j) = z(rng);
  for (int s = 0; s < t; ++s) {
    f.index.push_back(date(s));
    r.index.push_back(date(s));
    f.values(s, 0) = 0.0001 * (1 + s % 3);
    for (int j = 0; j < k; ++j) f.values(s, j + 1) = 0.01 * z(rng);
    for (int i = 0; i < n; ++i) {
      double v = f.values(s, 0) + 0.001 * i + noise * z(rng);
      for (int j = 0; j < k; ++j) v += load(i, j) * f.values(s, j + 1);
      r.values(s, i) = v;
    }
  }
  return {r, f};
}

}  // namespace

TEST_CASE("CSV parsing and round trip", "[pipeline]") {
  const auto t = parse("date,a,b\n2020-01-01,0.5,\n2020-01-02,NA,-1e-3\n");
  CHECK(t.index_name == "date");
  CHECK(t.columns == std::vector<std::string>{"a", "b"});
  CHECK(t.values(0, 0) == 0.5);
  CHECK(std::isnan(t.values(0, 1)));
  CHECK(std::isnan(t.values(1, 0)));
  CHECK(t.values(1, 1) == -1e-3);
  CHECK_THROWS_AS(parse("date,a\n2020-01-01,abc\n"), ParseError);
  CHECK_THROWS_AS(parse("date,a\n2020-01-01,1,2\n"), ParseError);

  WideTable w;
  w.index_name = "t";
  w.index = {"0", "1"};
  w.columns = {"x"};
  w.values.resize(2, 1);
  w.values << 0.1, 1.0 / 3.0;
  std::ostringstream a;
  write_wide_csv(a, w);
  std::istringstream in(a.str());
  const auto back = parse_wide_csv(in, "round");
  CHECK(back.values(1, 0) == 1.0 / 3.0);
  std::ostringstream b;
  write_wide_csv(b, back);
  CHECK(a.str() == b.str());
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("loading joins dates and drops incomplete series", "[pipeline]") {
  const auto r = parse(
      "date,A,B,C\n2020-01-01,0.01,0.02,0.03\n2020-01-02,0.01,,0.03\n2020-01-03,0.02,0.01,0.0\n"
      "2020-01-06,0.0,0.0,0.0\n");
  const auto f = parse("date,rf,mkt\n2020-01-02,0.0,0.01\n2020-01-03,0.0,0.02\n2020-01-06,0.0,0.03\n"
                       "2020-01-07,0.0,0.0\n");
  const auto lp = load_panels(r, f);
  CHECK(lp.returns.dates == std::vector<std::string>{"2020-01-02", "2020-01-03", "2020-01-06"});
  CHECK(lp.returns.ids == std::vector<std::string>{"A", "C"});
  CHECK(lp.report.rejected_series == std::vector<std::string>{"B"});
  CHECK(lp.report.dates_dropped_returns == 1);
  CHECK(lp.report.dates_dropped_factors == 1);
  CHECK(lp.report.dates_kept == 3);
  CHECK(lp.factors.names == std::vector<std::string>{"mkt"});

  CHECK_THROWS_AS(load_panels(r, parse("date,mkt,rf\n2020-01-02,0.0,0.01\n")), ParseError);
  CHECK_THROWS_AS(load_panels(parse("date,A\n2020/01/01,0.1\n"), f), ParseError);
  CHECK_THROWS_AS(load_panels(parse("date,A\n2020-01-03,0.1\n2020-01-02,0.1\n"), f), ParseError);
  CHECK_THROWS_AS(load_panels(r, parse("date,rf,mkt\n2021-01-02,0.0,0.01\n")), ValidationError);
}

TEST_CASE("OLS residuals", "[pipeline]") {
  SECTION("perfect fit leaves zero residuals") {
    auto [r, f] = synthetic(4, 60, 2, 0.0, 1);
    const auto lp = load_panels(r, f);
    const Matrix e = ols_residuals(lp.returns, lp.factors, 40);
    CHECK(e.cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("residuals are orthogonal to the regressors on the estimation window") {
    auto [r, f] = synthetic(5, 80, 3, 0.01, 2);
    const auto lp = load_panels(r, f);
    const int te = 50;
    const Matrix e = ols_residuals(lp.returns, lp.factors, te);
    Matrix x(te, 4);
    x.col(0).setOnes();
    x.rightCols(3) = lp.factors.factors.topRows(te);
    CHECK((e.leftCols(te) * x).cwiseAbs().maxCoeff() < 1e-10);
  }
  SECTION("an all-zero factor column is rank deficient") {
    auto [r, f] = synthetic(3, 30, 1, 0.01, 3);
    f.values.col(1).setZero();
    const auto lp = load_panels(r, f);
    CHECK_THROWS_AS(ols_residuals(lp.returns, lp.factors, 20), RankDeficient);
  }
  SECTION("without factors the residuals are demeaned excess returns") {
    auto [r, f] = synthetic(3, 30, 0, 0.01, 4);
    const auto lp = load_panels(r, f);
    const Matrix e = ols_residuals(lp.returns, lp.factors, 20);
    for (int i = 0; i < 3; ++i) {
      const Vector ex = lp.returns.returns.row(i).transpose() - lp.returns.risk_free;
      const double mean = ex.head(20).mean();
      for (int t = 0; t < 30; ++t) CHECK(e(i, t) == Approx(ex[t] - mean).margin(1e-15));
    }
  }
}

TEST_CASE("thresholding", "[pipeline]") {
  Matrix e(1, 20);
  for (int t = 0; t < 20; ++t) e(0, t) = double((t * 7) % 20);
  const auto bp = threshold_binary(e, 0.05, 20);
  // k = 1: the threshold is the minimum and nothing lies strictly below it.
  CHECK(bp.thresholds[0] == 0.0);
  CHECK(bp.y.sum() == 0);
  const auto b10 = threshold_binary(e, 0.1, 20);
  CHECK(b10.thresholds[0] == 1.0);
  CHECK(b10.y.cast<int>().sum() == 1);

  std::mt19937_64 rng(6);
  std::normal_distribution<double> z;
  Matrix big(6, 500);
  for (int i = 0; i < 6; ++i)
    for (int t = 0; t < 500; ++t) big(i, t) = z(rng);
  const auto bb = threshold_binary(big, 0.05, 400);
  for (int i = 0; i < 6; ++i) CHECK(bb.y.row(i).head(400).cast<double>().mean() <= 0.05);

  SECTION("invariant to extending the holdout") {
    const auto shorter = threshold_binary(Matrix(big.leftCols(450)), 0.05, 400);
    CHECK(shorter.thresholds == bb.thresholds);
    CHECK(shorter.y == bb.y.leftCols(450));
  }
  SECTION("invariant to strictly increasing transforms") {
    const Matrix cubed = big.array().cube();
    const auto bc = threshold_binary(cubed, 0.05, 400);
    CHECK(bc.y == bb.y);
  }
  CHECK_THROWS_AS(threshold_binary(big, 0.0, 400), ValidationError);
  CHECK_THROWS_AS(threshold_binary(big, 0.05, 0), ValidationError);
}

TEST_CASE("splitting by date", "[pipeline]") {
  const std::vector<std::string> d{"2020-01-01", "2020-01-02", "2020-01-03", "2020-01-06"};
  CHECK(split_index(d, "2020-01-02") == 2);
  CHECK(split_index(d, "2020-01-04") == 3);
  CHECK(split_index(d, "2020-01-06") == 4);
  CHECK_THROWS_AS(split_index(d, "2019-12-31"), ValidationError);
  CHECK_THROWS_AS(split_index(d, "2020-02-01"), ValidationError);

  Matrix e(2, 4);
  e << 0, 1, 2, 3, 3, 2, 1, 0;
  const auto bp = threshold_binary(e, 0.5, 2, d, {"a", "b"});
  const auto [est, hold] = split(bp, "2020-01-03");
  CHECK(est.dates.size() == 3);
  CHECK(hold.dates == std::vector<std::string>{"2020-01-06"});
  CHECK(est.y.cols() == 3);
  CHECK(hold.y.cols() == 1);
  CHECK(hold.thresholds == bp.thresholds);
}

TEST_CASE("pipeline output is byte-identical across runs", "[pipeline]") {
  const auto dir = std::filesystem::temp_directory_path() / "gab_pipeline_test";
  std::filesystem::create_directories(dir);
  auto [r, f] = synthetic(6, 120, 3, 0.02, 9);
  write_wide_csv((dir / "returns.csv").string(), r);
  write_wide_csv((dir / "factors.csv").string(), f);
  const auto run = [&] {
    const auto res = run_pipeline((dir / "returns.csv").string(), (dir / "factors.csv").string(), date(79), 0.05);
    std::ostringstream a, b;
    write_wide_csv(a, binary_panel_table(res.panel));
    write_wide_csv(b, thresholds_table(res.panel));
    return a.str() + b.str();
  };
  const std::string first = run();
  CHECK(first == run());
  const auto res = run_pipeline((dir / "returns.csv").string(), (dir / "factors.csv").string(), date(79), 0.05);
  CHECK(res.panel.split == 80);
  CHECK(res.panel.y.rows() == 6);
  std::filesystem::remove_all(dir);
}
