#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_gab(std::vector<std::string> args) { return gab::cli::run(args); }

const char* kInteractive = R"({
  "model": {"family": "Interactive", "n_series": 5,
            "params": {"omega": 0.05, "alpha": 0.1, "gamma": 0.2, "beta": 0.6}},
  "sim": {"horizon": 400, "burn_in": 0, "init": {"type": "fixed", "p": 0.5}}
})";

}  // namespace

TEST_CASE("simulate writes panels and is reproducible", "[cli]") {
  TempDir dir("gab_cli_sim");
  write(dir.path / "cfg.json", kInteractive);
  const auto cfg = (dir.path / "cfg.json").string();
  REQUIRE(run_gab({"simulate", "--config", cfg, "--seed", "7", "--out-dir", (dir.path / "a").string()}) == 0);
  REQUIRE(run_gab({"simulate", "--config", cfg, "--seed", "7", "--threads", "3", "--out-dir", (dir.path / "b").string()}) == 0);
  for (const char* f : {"p.csv", "y.csv", "X.csv", "summary.json"}) {
    INFO(f);
    CHECK(fs::exists(dir.path / "a" / f));
    CHECK(slurp(dir.path / "a" / f) == slurp(dir.path / "b" / f));
  }
  const auto manifest = json::parse(slurp(dir.path / "a" / "manifest.json"));
  CHECK(manifest["seed"] == 7);
  CHECK(manifest["command"] == "simulate");

  // The manifest alone reproduces the run.
  REQUIRE(run_gab({"simulate", "--config", (dir.path / "a" / "manifest.json").string(), "--out-dir",
               (dir.path / "c").string()}) == 0);
  CHECK(slurp(dir.path / "a" / "y.csv") == slurp(dir.path / "c" / "y.csv"));

  REQUIRE(run_gab({"simulate", "--config", cfg, "--seed", "8", "--out-dir", (dir.path / "d").string()}) == 0);
  CHECK(slurp(dir.path / "a" / "y.csv") != slurp(dir.path / "d" / "y.csv"));
}

TEST_CASE("validation failures exit with code 2", "[cli]") {
  TempDir dir("gab_cli_bad");
  write(dir.path / "bad.json", R"({"model": {"family": "LinearUnivariate",
    "params": {"omega": 0.6, "alpha": 0.3, "beta": 0.3}}, "sim": {"horizon": 10}})");
  CHECK(run_gab({"simulate", "-c", (dir.path / "bad.json").string(), "-o", dir.path.string()}) == 2);
  write(dir.path / "est.json", R"({"data": "missing.csv", "model": {"family": "LinearUnivariate",
    "params": {"omega": 0.1, "alpha": 0.1, "beta": 0.1}}})");
  CHECK(run_gab({"estimate", "binary", "-c", (dir.path / "est.json").string(), "-o", dir.path.string()}) == 2);
  write(dir.path / "broken.json", "{ not json");
  CHECK(run_gab({"simulate", "-c", (dir.path / "broken.json").string(), "-o", dir.path.string()}) == 2);
  CHECK(run_gab({"simulate"}) == 2);
  CHECK(run_gab({"frobnicate"}) == 2);
}

TEST_CASE("estimate, forecast and coupling run on simulated data", "[cli]") {
  TempDir dir("gab_cli_pipeline");
  write(dir.path / "sim.json", kInteractive);
  REQUIRE(run_gab({"simulate", "-c", (dir.path / "sim.json").string(), "--seed", "3", "-o", (dir.path / "sim").string()}) == 0);

  write(dir.path / "est.json", R"({"data": "sim/y.csv", "model": {"family": "Interactive",
    "params": {"omega": 0.02, "alpha": 0.05, "gamma": 0.1, "beta": 0.5}}, "fit": {"starts": 2}})");
  REQUIRE(run_gab({"estimate", "binary", "-c", (dir.path / "est.json").string(), "-o", (dir.path / "est").string()}) == 0);
  const auto fit = json::parse(slurp(dir.path / "est" / "fit.json"));
  CHECK(fit["parameters"].size() == 20);
  CHECK(fit["converged"] == true);

  write(dir.path / "poi.json", R"({"data": "sim/X.csv"})");
  REQUIRE(run_gab({"estimate", "poisson", "-c", (dir.path / "poi.json").string(), "-o", (dir.path / "poi").string()}) == 0);
  const auto pfit = json::parse(slurp(dir.path / "poi" / "fit.json"));
  CHECK(pfit["c_bar"].get<double>() > 0.0);
  CHECK(fs::exists(dir.path / "poi" / "lambda.csv"));

  write(dir.path / "fc.json", R"({"data": "sim/y.csv", "split": 300})");
  REQUIRE(run_gab({"forecast", "-c", (dir.path / "fc.json").string(), "-o", (dir.path / "fc").string()}) == 0);
  CHECK(slurp(dir.path / "fc" / "mse.csv").find("model4_persistence") != std::string::npos);
  write(dir.path / "fc_empty.json", R"({"data": "sim/y.csv", "split": 400})");
  CHECK(run_gab({"forecast", "-c", (dir.path / "fc_empty.json").string(), "-o", (dir.path / "fc2").string()}) == 2);

  write(dir.path / "cpl.json", R"({"model": {"family": "LinearUnivariate",
    "params": {"omega": 0.1, "alpha": 0.2, "beta": 0.3}}, "horizon": 30, "reps": 50})");
  REQUIRE(run_gab({"diagnose-coupling", "-c", (dir.path / "cpl.json").string(), "-o", (dir.path / "cpl").string()}) == 0);
  const auto cpl = json::parse(slurp(dir.path / "cpl" / "coupling.json"));
  CHECK(cpl["slope"].get<double>() < 0.0);
}

TEST_CASE("aggregate and ingest", "[cli]") {
  TempDir dir("gab_cli_agg");
  write(dir.path / "agg.json", R"({"scaling": {"n_grid": [50, 100]},
    "experiment": {"horizon": 100, "burn_in": 100, "reps": 2}})");
  REQUIRE(run_gab({"aggregate", "-c", (dir.path / "agg.json").string(), "-o", (dir.path / "agg").string()}) == 0);
  CHECK(fs::exists(dir.path / "agg" / "diagnostics.csv"));
  write(dir.path / "agg_bad.json", R"({"scaling": {"n_grid": [1]}})");
  CHECK(run_gab({"aggregate", "-c", (dir.path / "agg_bad.json").string(), "-o", (dir.path / "agg2").string()}) == 2);

  std::string returns = "date,A,B\n", factors = "date,rf,mkt\n";
  for (int d = 1; d <= 28; ++d) {
    char date[16];
    std::snprintf(date, sizeof date, "2021-02-%02d", d);
    returns += std::string(date) + "," + std::to_string(0.01 * ((d * 7) % 11 - 5)) + "," +
               std::to_string(0.01 * ((d * 5) % 13 - 6)) + "\n";
    factors += std::string(date) + ",0.0001," + std::to_string(0.001 * ((d * 3) % 7 - 3)) + "\n";
  }
  write(dir.path / "returns.csv", returns);
  write(dir.path / "factors.csv", factors);
  write(dir.path / "ing.json", R"({"returns": "returns.csv", "factors": "factors.csv",
    "split_date": "2021-02-20", "level": 0.1})");
  REQUIRE(run_gab({"ingest", "-c", (dir.path / "ing.json").string(), "-o", (dir.path / "ing").string()}) == 0);
  for (const char* f : {"binary_panel.csv", "binary_estimation.csv", "binary_holdout.csv", "thresholds.csv"}) {
    CHECK(fs::exists(dir.path / "ing" / f));
  }
  write(dir.path / "ing_bad.json", R"({"returns": "returns.csv", "factors": "factors.csv",
    "split_date": "2020-01-01"})");
  CHECK(run_gab({"ingest", "-c", (dir.path / "ing_bad.json").string(), "-o", (dir.path / "ing2").string()}) == 2);
}
