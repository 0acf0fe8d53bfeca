#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>

#include "gab/aggregation.hpp"
#include "gab/binary_mle.hpp"
#include "gab/contraction.hpp"
#include "gab/csv.hpp"
#include "gab/errors.hpp"
#include "gab/pipeline.hpp"
#include "gab/poisson_ar.hpp"
#include "gab/simulate.hpp"
#include "gab/spec_io.hpp"

#ifndef GAB_VERSION
#define GAB_VERSION "0.0.0"
#endif

namespace gab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::optional<int> threads;
};

// Resolved run: config document, seed and thread count after flag overrides.
struct Run {
  std::string command;
  json config;
  fs::path base_dir;
  fs::path out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<std::string> outputs;
  json extra = json::object();

  fs::path input(const std::string& key) const {
    if (!config.contains(key)) throw ValidationError("config is missing '" + key + "'");
    fs::path p = config.at(key).get<std::string>();
    return p.is_relative() ? base_dir / p : p;
  }
  fs::path output(const std::string& name) {
    outputs.push_back(name);
    return out_dir / name;
  }
};

std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_color_mt("gab");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("GAB_LOG")) l->set_level(spdlog::level::from_str(env));
    return l;
  }();
  return log;
}

Run resolve(const std::string& command, const Globals& g) {
  Run r;
  r.command = command;
  if (g.config_path.empty()) throw ValidationError("--config is required");
  json doc;
  try {
    doc = read_json_file(g.config_path);
  } catch (const json::exception& e) {
    throw ParseError(g.config_path + ": " + e.what());
  }
  // A manifest from an earlier run re-runs that run.
  if (doc.is_object() && doc.contains("manifest_version") && doc.contains("config")) {
    if (doc.value("command", command) != command) {
      throw ValidationError("manifest was written by '" + doc.value("command", std::string()) + "'");
    }
    doc = doc.at("config");
  }
  if (!doc.is_object()) throw ParseError(g.config_path + ": config must be a JSON object");
  r.base_dir = fs::absolute(g.config_path).parent_path();
  if (doc.contains("base_dir")) r.base_dir = doc.at("base_dir").get<std::string>();
  r.seed = g.seed ? *g.seed : doc.value("seed", std::uint64_t{0});
  r.threads = g.threads ? *g.threads : doc.value("threads", 1);
  if (r.threads < 1) throw ValidationError("--threads must be at least 1");
  doc["seed"] = r.seed;
  doc["threads"] = r.threads;
  doc["base_dir"] = r.base_dir.string();
  r.config = std::move(doc);
  r.out_dir = g.out_dir;
  fs::create_directories(r.out_dir);
  return r;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

void write_manifest(Run& r) {
  json m;
  m["manifest_version"] = 1;
  m["command"] = r.command;
  m["version"] = GAB_VERSION;
  m["seed"] = r.seed;
  m["threads"] = r.threads;
  m["config"] = r.config;
  m["outputs"] = r.outputs;
  for (auto& [k, v] : r.extra.items()) m[k] = v;
  write_json(r.out_dir / "manifest.json", m);
}

ModelSpec model_from(Run& r, const std::string& key = "model") {
  if (!r.config.contains(key)) throw ValidationError("config is missing '" + key + "'");
  json& doc = r.config[key];
  if (doc.is_string()) {
    fs::path p = doc.get<std::string>();
    if (p.is_relative()) p = r.base_dir / p;
    doc = read_json_file(p);
  }
  const auto spec = spec_from_json(doc, r.base_dir);
  const auto report = validate_spec(spec);
  if (!report.ok()) throw ValidationError("invalid model spec: " + report.summary());
  doc = spec_to_json(spec);  // canonical form goes to the manifest
  r.extra["spec_hash"] = std::to_string(spec_hash(spec));
  return spec;
}

json contraction_json(const ModelSpec& spec) {
  const auto c = check_contraction(spec);
  json j{{"rho", c.rho},
         {"assumption1_supported", c.assumption1_supported},
         {"assumption1_holds", c.assumption1_holds},
         {"assumption2_supported", c.assumption2_supported},
         {"assumption2_holds", c.assumption2_holds},
         {"assumption2_bound", c.assumption2_bound},
         {"note", c.note}};
  return j;
}

WideTable count_table(const std::vector<std::int64_t>& x, const std::vector<double>* lambda = nullptr) {
  WideTable t;
  t.index_name = "t";
  t.columns = {"X"};
  if (lambda) t.columns.push_back("lambda");
  t.values.resize(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t k = 0; k < x.size(); ++k) {
    t.index.push_back(std::to_string(k));
    t.values(static_cast<Eigen::Index>(k), 0) = static_cast<double>(x[k]);
    if (lambda) t.values(static_cast<Eigen::Index>(k), 1) = (*lambda)[k];
  }
  return t;
}

std::vector<std::int64_t> read_counts(const fs::path& path, const std::string& column) {
  const auto t = read_wide_csv(path.string());
  Eigen::Index col = -1;
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    if (t.columns[j] == column) col = static_cast<Eigen::Index>(j);
  }
  if (col < 0) throw ValidationError(path.string() + ": no column '" + column + "'");
  std::vector<std::int64_t> x;
  for (Eigen::Index k = 0; k < t.values.rows(); ++k) {
    const double v = t.values(k, col);
    if (!(v >= 0.0) || v != std::floor(v)) {
      throw ParseError(path.string() + ": row " + std::to_string(k + 2) + " is not a nonnegative integer count");
    }
    x.push_back(static_cast<std::int64_t>(v));
  }
  return x;
}

int cmd_simulate(Run& r) {
  const auto spec = model_from(r);
  SimConfig cfg = sim_config_from_json(r.config.value("sim", json::object()));
  cfg.seed = r.seed;
  cfg.threads = r.threads;
  const auto replicate = r.config.value("replicate", 0u);
  r.config["sim"] = sim_config_to_json(cfg);
  logger()->info("simulating {} series x {} periods", spec.n_series, cfg.horizon);
  const auto traj = simulate(spec, cfg, replicate);
  write_wide_csv(r.output("p.csv").string(), panel_table(traj.p));
  write_wide_csv(r.output("y.csv").string(), panel_table(traj.y.cast<double>()));
  write_wide_csv(r.output("X.csv").string(), count_table(aggregate_counts(traj.y).x));

  json summary;
  summary["n_series"] = spec.n_series;
  summary["horizon"] = cfg.horizon;
  summary["mean_y"] = traj.y.cast<double>().mean();
  const Vector per = traj.y.cast<double>().rowwise().mean();
  summary["mean_y_per_series"] = std::vector<double>(per.data(), per.data() + per.size());
  try {
    summary["unconditional_mean"] = unconditional_mean(spec).total_mean;
  } catch (const std::exception& e) {
    summary["unconditional_mean"] = nullptr;
    summary["unconditional_mean_note"] = e.what();
  }
  summary["contraction"] = contraction_json(spec);
  write_json(r.output("summary.json"), summary);
  return kExitOk;
}

int cmd_estimate_binary(Run& r) {
  const fs::path data = r.input("data");
  const auto table = read_wide_csv(data.string());
  const BinaryMatrix y = binary_from_table(table);
  json& model = r.config["model"];
  if (model.is_object() && !model.contains("n_series")) model["n_series"] = y.rows();
  const auto proto = model_from(r);
  const json fc = r.config.value("fit", json::object());
  FitConfig cfg;
  cfg.restriction = restriction_from_string(fc.value("restriction", std::string("none")));
  cfg.starts = fc.value("starts", cfg.starts);
  cfg.max_iterations = fc.value("max_iterations", cfg.max_iterations);
  cfg.grad_tol = fc.value("grad_tol", cfg.grad_tol);
  cfg.separable = fc.value("separable", cfg.separable);
  cfg.likelihood.floor = fc.value("floor", cfg.likelihood.floor);
  cfg.likelihood.restriction = cfg.restriction;
  cfg.seed = r.seed;
  cfg.threads = r.threads;
  const auto fit = fit_mle(proto, y, cfg);
  if (fit.clip_count > 0) logger()->warn("{} probabilities clipped to the likelihood floor", fit.clip_count);
  if (!fit.fisher_ok) logger()->warn("information matrix: {}", fit.fisher_message);

  json out;
  out["family"] = std::string(to_string(proto.family));
  out["restriction"] = std::string(to_string(cfg.restriction));
  json params = json::array();
  for (Eigen::Index j = 0; j < fit.theta.size(); ++j) {
    const double se = fit.std_errors.size() > j ? fit.std_errors[j] : std::nan("");
    params.push_back({{"name", fit.layout.labels[static_cast<std::size_t>(j)]},
                      {"estimate", fit.theta[j]},
                      {"std_error", std::isfinite(se) ? json(se) : json(nullptr)}});
  }
  out["parameters"] = params;
  out["loglik"] = fit.loglik;
  out["t_eff"] = fit.t_eff;
  out["clip_count"] = fit.clip_count;
  out["converged"] = fit.converged;
  out["iterations"] = fit.iterations;
  out["grad_norm"] = fit.grad_norm;
  out["starts_ok"] = fit.starts_ok;
  out["fisher_ok"] = fit.fisher_ok;
  out["fisher_message"] = fit.fisher_message;
  out["spec"] = spec_to_json(fit.spec);
  write_json(r.output("fit.json"), out);
  return kExitOk;
}

int cmd_estimate_poisson(Run& r) {
  const auto x = read_counts(r.input("data"), r.config.value("column", std::string("X")));
  const json fc = r.config.value("fit", json::object());
  PoissonFitConfig cfg;
  cfg.intercept_only = fc.value("intercept_only", false);
  cfg.starts = fc.value("starts", cfg.starts);
  cfg.max_iterations = fc.value("max_iterations", cfg.max_iterations);
  cfg.seed = r.seed;
  const auto fit = fit_poisson_mle(x, cfg);
  auto se = [&](int k) { return std::isfinite(fit.std_errors[k]) ? json(fit.std_errors[k]) : json(nullptr); };
  json out;
  out["c_bar"] = fit.params.c_bar;
  out["gamma_bar"] = fit.params.gamma_bar;
  out["beta"] = fit.params.beta;
  out["std_errors"] = {{"c_bar", se(0)}, {"gamma_bar", se(1)}, {"beta", se(2)}};
  out["loglik"] = fit.loglik;
  out["lambda0"] = fit.lambda0;
  out["n_obs"] = fit.n_obs;
  out["converged"] = fit.converged;
  out["iterations"] = fit.iterations;
  out["grad_norm"] = fit.grad_norm;
  try {
    out["stationary_mean"] = fit.params.stationary_mean();
  } catch (const DegenerateMean&) {
    out["stationary_mean"] = nullptr;
  }
  if (r.config.contains("calibrate_n")) {
    const int n = r.config.at("calibrate_n").get<int>();
    out["calibrated_binary_spec"] = spec_to_json(calibrate_binary_from_poisson(fit.params, n));
  }
  write_json(r.output("fit.json"), out);
  const auto lambda = intensity_path(fit.params, x, fit.lambda0, fit.lambda0);
  write_wide_csv(r.output("lambda.csv").string(), count_table(x, &lambda));
  return kExitOk;
}

RareEventScaling scaling_from(const json& j) {
  RareEventScaling s;
  s.n_grid = j.value("n_grid", s.n_grid);
  s.kappa = j.value("kappa", s.kappa);
  s.c = j.value("c", s.c);
  s.a = j.value("a", s.a);
  s.beta = j.value("beta", s.beta);
  s.gamma = j.value("gamma", s.gamma);
  s.heterogeneity = j.value("heterogeneity", s.heterogeneity);
  s.heterogeneous_gamma = j.value("heterogeneous_gamma", s.heterogeneous_gamma);
  s.bound = j.value("bound", s.bound);
  return s;
}

json diagnostics_json(const LimitDiagnostics& d) {
  return {{"n", d.n},
          {"degree", d.degree},
          {"tv_mean", d.tv_mean},
          {"tv_pooled", d.tv_pooled},
          {"mean_x", d.mean_x},
          {"mean_x_se", d.mean_x_se},
          {"mean_sum_p", d.mean_sum_p},
          {"var_sum_p", d.var_sum_p},
          {"dispersion_ratio", d.dispersion_ratio},
          {"pit_deviation", d.pit_deviation},
          {"lambda_gap", d.lambda_gap},
          {"max_p", d.max_p},
          {"limit_mean", d.limit_mean},
          {"limit_var", d.limit_var},
          {"exact_mean_sum_p", d.exact_mean_sum_p},
          {"exact_var_sum_p", d.exact_var_sum_p},
          {"samples", d.samples}};
}

WideTable diagnostics_table(const std::vector<LimitDiagnostics>& rows, const std::string& label) {
  WideTable t;
  t.index_name = label;
  t.columns = {"n", "degree", "tv_mean", "tv_pooled", "mean_x", "mean_x_se", "mean_sum_p", "var_sum_p",
               "dispersion_ratio", "pit_deviation", "lambda_gap", "max_p", "limit_mean", "limit_var",
               "exact_mean_sum_p", "exact_var_sum_p"};
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& d = rows[k];
    const double v[] = {double(d.n),  double(d.degree), d.tv_mean,       d.tv_pooled,        d.mean_x,
                        d.mean_x_se,  d.mean_sum_p,     d.var_sum_p,     d.dispersion_ratio, d.pit_deviation,
                        d.lambda_gap, d.max_p,          d.limit_mean,    d.limit_var,        d.exact_mean_sum_p,
                        d.exact_var_sum_p};
    t.index.push_back(std::to_string(k));
    for (std::size_t j = 0; j < t.columns.size(); ++j) t.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = v[j];
  }
  return t;
}

int cmd_aggregate(Run& r) {
  const auto scaling = scaling_from(r.config.value("scaling", json::object()));
  for (const auto& f : rare_event_feasibility(scaling)) {
    if (!f.feasible) throw ValidationError("N = " + std::to_string(f.n) + " is infeasible: " + f.detail);
  }
  const json ec = r.config.value("experiment", json::object());
  ExperimentConfig cfg;
  cfg.horizon = ec.value("horizon", cfg.horizon);
  cfg.burn_in = ec.value("burn_in", cfg.burn_in);
  cfg.reps = ec.value("reps", cfg.reps);
  cfg.tv_stride = ec.value("tv_stride", cfg.tv_stride);
  cfg.pit_bins = ec.value("pit_bins", cfg.pit_bins);
  cfg.exact_moments = ec.value("exact_moments", cfg.exact_moments);
  cfg.seed = r.seed;
  cfg.threads = r.threads;
  const auto rows = run_limit_experiment(scaling, cfg);
  write_wide_csv(r.output("diagnostics.csv").string(), diagnostics_table(rows, "row"));
  json summary = json::array();
  for (const auto& d : rows) summary.push_back(diagnostics_json(d));

  if (r.config.contains("network")) {
    const double mult = r.config.at("network").value("degree_multiplier", 4.0);
    const auto cmp = run_network_limit_experiment(scaling, mult, cfg);
    std::vector<LimitDiagnostics> flat;
    json net = json::array();
    for (const auto& c : cmp) {
      flat.push_back(c.complete);
      flat.push_back(c.network);
      net.push_back({{"n", c.network.n},
                     {"degree", c.network.degree},
                     {"rel_diff_mean_x", c.rel_diff_mean_x},
                     {"rel_diff_var_sum_p", c.rel_diff_var_sum_p}});
    }
    write_wide_csv(r.output("network_diagnostics.csv").string(), diagnostics_table(flat, "row"));
    write_json(r.output("network_comparison.json"), net);
  }
  write_json(r.output("diagnostics.json"), summary);
  return kExitOk;
}

int cmd_forecast(Run& r) {
  const auto table = read_wide_csv(r.input("data").string());
  const BinaryMatrix y = binary_from_table(table);
  int start = -1;
  if (r.config.contains("split_date")) {
    start = split_index(table.index, r.config.at("split_date").get<std::string>());
  } else if (r.config.contains("split")) {
    start = r.config.at("split").get<int>();
  } else {
    throw ValidationError("config needs 'split' (periods) or 'split_date'");
  }
  if (start < 1 || start > y.cols()) throw ValidationError("split must lie in [1, T]");
  if (start == y.cols()) throw ValidationError("holdout window is empty");
  const BinaryMatrix est = y.leftCols(start);
  const BinaryMatrix hold = y.rightCols(y.cols() - start);
  const int n = static_cast<int>(y.rows());
  const double constant = r.config.value("constant", 0.05);

  json& model = r.config["model"];
  if (model.is_null()) {
    model = {{"family", "Interactive"}, {"params", {{"omega", 0.01}, {"alpha", 0.05}, {"gamma", 0.2}, {"beta", 0.5}}}};
  }
  if (model.is_object() && !model.contains("n_series")) model["n_series"] = n;
  const auto proto = model_from(r);
  FitConfig fc;
  fc.seed = r.seed;
  fc.threads = r.threads;
  fc.starts = r.config.value("starts", fc.starts);
  const auto fit = fit_mle(proto, est, fc);
  const auto poisson = fit_poisson_mle(aggregate_counts(est).x, PoissonFitConfig{.seed = r.seed});
  const auto calibrated = calibrate_binary_from_poisson(poisson.params, n);

  const std::vector<std::pair<std::string, Matrix>> models{
      {"model1_gab_mle", forecast_one_step(fit, y, start)},
      {"model2_poisson_calibrated", forecast_one_step(calibrated, y, start)},
      {"model3_constant", forecast_constant(y, start, constant)},
      {"model4_persistence", forecast_persistence(y, start)},
  };
  WideTable t;
  t.index_name = "model";
  t.columns = {"pooled"};
  for (const auto& c : table.columns) t.columns.push_back(c);
  t.values.resize(4, n + 1);
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto rep = mse_eval(models[k].second, hold);
    t.index.push_back(models[k].first);
    t.values(static_cast<Eigen::Index>(k), 0) = rep.pooled;
    t.values.row(static_cast<Eigen::Index>(k)).tail(n) = rep.per_series.transpose();
  }
  write_wide_csv(r.output("mse.csv").string(), t);
  write_wide_csv(r.output("forecast_model1.csv").string(), panel_table(models[0].second));
  json extra{{"estimation_periods", start},
             {"holdout_periods", y.cols() - start},
             {"poisson", {{"c_bar", poisson.params.c_bar}, {"gamma_bar", poisson.params.gamma_bar}, {"beta", poisson.params.beta}}},
             {"model1_loglik", fit.loglik}};
  write_json(r.output("forecast.json"), extra);
  return kExitOk;
}

int cmd_ingest(Run& r) {
  const std::string split_date = r.config.at("split_date").get<std::string>();
  const double level = r.config.value("level", 0.05);
  const auto res = run_pipeline(r.input("returns").string(), r.input("factors").string(), split_date, level);
  if (!res.report.rejected_series.empty()) {
    logger()->warn("{} series dropped for missing values", res.report.rejected_series.size());
  }
  const auto [est, hold] = split(res.panel, split_date);
  write_wide_csv(r.output("binary_panel.csv").string(), binary_panel_table(res.panel));
  write_wide_csv(r.output("binary_estimation.csv").string(), binary_panel_table(est));
  write_wide_csv(r.output("binary_holdout.csv").string(), binary_panel_table(hold));
  write_wide_csv(r.output("thresholds.csv").string(), thresholds_table(res.panel));
  json report{{"rejected_series", res.report.rejected_series},
              {"dates_dropped_returns", res.report.dates_dropped_returns},
              {"dates_dropped_factors", res.report.dates_dropped_factors},
              {"dates_kept", res.report.dates_kept},
              {"estimation_periods", res.panel.split},
              {"series", res.panel.ids.size()}};
  write_json(r.output("ingest_report.json"), report);
  return kExitOk;
}

InitPolicy init_from(const json& j) {
  if (j.is_number()) return fixed_init(j.get<double>());
  return sim_config_from_json(json{{"init", j}}).init;
}

int cmd_diagnose_coupling(Run& r) {
  const auto spec = model_from(r);
  SimConfig cfg;
  cfg.seed = r.seed;
  cfg.threads = r.threads;
  cfg.horizon = r.config.value("horizon", 50);
  cfg.burn_in = 0;
  const int reps = r.config.value("reps", 200);
  const auto tr = coupled_simulate(spec, init_from(r.config.value("init_a", json(0.0))),
                                   init_from(r.config.value("init_b", json(1.0))), cfg, reps);
  WideTable t;
  t.index_name = "t";
  t.columns = {"mean_distance"};
  t.values.resize(static_cast<Eigen::Index>(tr.mean_distance.size()), 1);
  for (std::size_t k = 0; k < tr.mean_distance.size(); ++k) {
    t.index.push_back(std::to_string(k));
    t.values(static_cast<Eigen::Index>(k), 0) = tr.mean_distance[k];
  }
  write_wide_csv(r.output("coupling.csv").string(), t);
  const auto c = contraction_json(spec);
  json out{{"slope", tr.slope},
           {"intercept", tr.intercept},
           {"fit_points", tr.fit_points},
           {"replications", tr.replications},
           {"contraction", c}};
  if (c.at("rho").get<double>() > 0.0) out["log_rho"] = std::log(c.at("rho").get<double>());
  write_json(r.output("coupling.json"), out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Generalized autoregressive binary panels: simulation, estimation, aggregation", "gab"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  int threads = 1;
  app.add_option("-c,--config", g.config_path, "JSON config file (or a manifest.json to re-run)");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("-o,--out-dir", g.out_dir, "output directory")->capture_default_str();
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (results do not depend on it)");
  app.set_version_flag("--version", GAB_VERSION);

  auto* sim = app.add_subcommand("simulate", "simulate a panel: p.csv, y.csv, X.csv, summary.json");
  auto* est = app.add_subcommand("estimate", "maximum likelihood estimation");
  est->require_subcommand(1);
  auto* est_bin = est->add_subcommand("binary", "binary panel MLE: fit.json");
  auto* est_poi = est->add_subcommand("poisson", "Poisson autoregression MLE: fit.json, lambda.csv");
  auto* agg = app.add_subcommand("aggregate", "rare-event limit diagnostics: diagnostics.csv");
  auto* fc = app.add_subcommand("forecast", "out-of-sample MSE of the four forecasting models: mse.csv");
  auto* ing = app.add_subcommand("ingest", "returns and factors to a binary tail-event panel");
  auto* cpl = app.add_subcommand("diagnose-coupling", "coupling distance decay: coupling.csv");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }
  if (*seed_opt) g.seed = seed;
  if (*threads_opt) g.threads = threads;

  std::string command;
  std::function<int(Run&)> handler;
  if (*sim) command = "simulate", handler = cmd_simulate;
  else if (*est_bin) command = "estimate binary", handler = cmd_estimate_binary;
  else if (*est_poi) command = "estimate poisson", handler = cmd_estimate_poisson;
  else if (*agg) command = "aggregate", handler = cmd_aggregate;
  else if (*fc) command = "forecast", handler = cmd_forecast;
  else if (*ing) command = "ingest", handler = cmd_ingest;
  else if (*cpl) command = "diagnose-coupling", handler = cmd_diagnose_coupling;

  try {
    Run r = resolve(command, g);
    logger()->info("{}: seed {}, threads {}, output {}", command, r.seed, r.threads, r.out_dir.string());
    const int code = handler(r);
    write_manifest(r);
    return code;
  } catch (const ValidationError& e) {
    logger()->error("{}", e.what());
    return kExitValidation;
  } catch (const json::exception& e) {
    logger()->error("config: {}", e.what());
    return kExitValidation;
  } catch (const NumericalError& e) {
    logger()->error("{}", e.what());
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    logger()->error("{}", e.what());
    return kExitValidation;
  }
}

}  // namespace gab::cli
