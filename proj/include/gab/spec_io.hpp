#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gab/model.hpp"
#include "gab/simulate.hpp"

namespace gab {

inline constexpr int kSchemaVersion = 1;

/// Parses a model document:
///   {"schema_version": 1, "family": "Interactive", "n_series": 5,
///    "lags": {"s": 1, "q": 1},
///    "params": {"omega": 0.05, "alpha": [...], "beta": 0.6, "gamma": 0.2},
///    "nonlinearity": "cubic_weak",
///    "network": [[...]] | {"csv": "W.csv"} | {"circulant_degree": 3}}
/// Scalars broadcast across series. For lag vectors a flat array of length q
/// (or s) is shared by all series and an array of arrays is per series.
/// NonlinearInteractive takes params {c, a, local_y, local_p, gamma, beta,
/// kappa} and nonlinearity {"own", "local", "aggregate", "cap"}.
/// Relative CSV paths resolve against `base_dir`.
ModelSpec spec_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
/// Canonical form: every parameter expanded per series, W dense.
nlohmann::json spec_to_json(const ModelSpec& spec);

/// {"seed", "horizon", "burn_in", "threads",
///  "init": {"type": "fixed", "p": ..., "y": ...} | {"type": "stationary_warmup", "extra": 0}}
SimConfig sim_config_from_json(const nlohmann::json& doc);
nlohmann::json sim_config_to_json(const SimConfig& cfg);

/// N rows of N comma-separated weights.
Matrix load_matrix_csv(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace gab
