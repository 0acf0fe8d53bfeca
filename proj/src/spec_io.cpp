#include "gab/spec_io.hpp"

#include <fstream>
#include <sstream>

#include "gab/aggregation.hpp"
#include "gab/errors.hpp"

namespace gab {

using nlohmann::json;

namespace {

double as_double(const json& v, const std::string& what) {
  if (!v.is_number()) throw ParseError(what + " must be a number");
  return v.get<double>();
}

std::vector<double> per_series(const json& v, int n, const std::string& what) {
  if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(n), v.get<double>());
  if (!v.is_array()) throw ParseError(what + " must be a number or an array");
  if (static_cast<int>(v.size()) != n) {
    throw ShapeMismatch(what + " has " + std::to_string(v.size()) + " entries, expected " +
                        std::to_string(n));
  }
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_double(e, what));
  return out;
}

// Lag coefficients: number (one lag, shared), flat array of length `lags`
// (shared), or array of N arrays (per series).
std::vector<std::vector<double>> per_series_lags(const json& v, int n, int lags,
                                                 const std::string& what) {
  auto row = [&](const json& r) {
    if (r.is_number()) {
      if (lags != 1) throw ShapeMismatch(what + " needs " + std::to_string(lags) + " lags");
      return std::vector<double>{r.get<double>()};
    }
    if (!r.is_array() || static_cast<int>(r.size()) != lags) {
      throw ShapeMismatch(what + " needs " + std::to_string(lags) + " lag coefficients");
    }
    std::vector<double> out;
    for (const auto& e : r) out.push_back(as_double(e, what));
    return out;
  };
  if (v.is_number()) return std::vector<std::vector<double>>(static_cast<std::size_t>(n), row(v));
  if (!v.is_array()) throw ParseError(what + " must be a number or an array");
  const bool nested = !v.empty() && v.front().is_array();
  if (!nested && static_cast<int>(v.size()) == lags) {
    return std::vector<std::vector<double>>(static_cast<std::size_t>(n), row(v));
  }
  if (static_cast<int>(v.size()) != n) {
    throw ShapeMismatch(what + " has " + std::to_string(v.size()) + " entries, expected " +
                        std::to_string(n) + " series");
  }
  std::vector<std::vector<double>> out;
  for (const auto& r : v) out.push_back(row(r));
  return out;
}

const json& require(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  return obj.at(key);
}

json value_or(const json& obj, const char* key, json fallback) {
  return obj.contains(key) ? obj.at(key) : fallback;
}

SparseRowMatrix parse_network(const json& v, int n, const std::filesystem::path& base_dir) {
  if (v.is_array()) {
    Matrix w(n, n);
    if (static_cast<int>(v.size()) != n) throw ShapeMismatch("network must have N rows");
    for (int i = 0; i < n; ++i) {
      const auto& r = v[static_cast<std::size_t>(i)];
      if (!r.is_array() || static_cast<int>(r.size()) != n) {
        throw ShapeMismatch("network row " + std::to_string(i) + " must have N entries");
      }
      for (int j = 0; j < n; ++j) w(i, j) = as_double(r[static_cast<std::size_t>(j)], "network entry");
    }
    return to_sparse(w);
  }
  if (v.is_object() && v.contains("csv")) {
    std::filesystem::path path = v.at("csv").get<std::string>();
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    const Matrix w = load_matrix_csv(path);
    if (w.rows() != n || w.cols() != n) throw ShapeMismatch("network CSV must be N x N");
    return to_sparse(w);
  }
  if (v.is_object() && v.contains("circulant_degree")) {
    return build_regular_network(n, v.at("circulant_degree").get<int>());
  }
  throw ParseError("network must be a matrix, {\"csv\": path} or {\"circulant_degree\": d}");
}

}  // namespace

ModelSpec spec_from_json(const json& doc, const std::filesystem::path& base_dir) {
  try {
    if (!doc.is_object()) throw ParseError("model spec must be a JSON object");
    const int version = value_or(doc, "schema_version", kSchemaVersion).get<int>();
    if (version != kSchemaVersion) {
      throw ParseError("unsupported schema_version " + std::to_string(version));
    }
    ModelSpec spec;
    spec.family = family_from_string(require(doc, "family").get<std::string>());
    spec.n_series = value_or(doc, "n_series", 1).get<int>();
    if (spec.n_series < 1) throw ValidationError("n_series must be positive");
    const int n = spec.n_series;
    const json lags = value_or(doc, "lags", json::object());
    spec.lags.s = value_or(lags, "s", 1).get<int>();
    spec.lags.q = value_or(lags, "q", 1).get<int>();
    const json& params = require(doc, "params");

    if (spec.family == Family::NonlinearInteractive) {
      InteractiveNonlinearity b;
      b.kappa = value_or(params, "kappa", 1.0).get<double>();
      b.c = per_series(require(params, "c"), n, "c");
      b.a = per_series(value_or(params, "a", 0.0), n, "a");
      b.local_y = per_series(value_or(params, "local_y", 0.0), n, "local_y");
      b.local_p = per_series(value_or(params, "local_p", 0.0), n, "local_p");
      b.gamma = per_series(value_or(params, "gamma", 0.0), n, "gamma");
      const json beta = require(params, "beta");
      if (beta.is_number()) {
        b.beta_lags = {beta.get<double>()};
      } else {
        for (const auto& e : beta) b.beta_lags.push_back(as_double(e, "beta"));
      }
      const json nl = value_or(doc, "nonlinearity", json::object());
      b.own = own_term_from_string(value_or(nl, "own", "linear").get<std::string>());
      b.local = local_term_from_string(value_or(nl, "local", "linear").get<std::string>());
      b.aggregate = aggregate_term_from_string(value_or(nl, "aggregate", "identity").get<std::string>());
      b.cap = value_or(nl, "cap", 5.0).get<double>();
      return make_nonlinear_interactive(std::move(b), n);
    }

    const auto omega = per_series(require(params, "omega"), n, "omega");
    const auto alpha = per_series_lags(value_or(params, "alpha", 0.0), n, spec.lags.q, "alpha");
    const auto beta = per_series_lags(value_or(params, "beta", 0.0), n, spec.lags.s, "beta");
    const auto gamma = per_series(value_or(params, "gamma", 0.0), n, "gamma");
    spec.series.resize(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < spec.series.size(); ++i) {
      spec.series[i] = {omega[i], alpha[i], beta[i], gamma[i]};
    }
    if (spec.family == Family::NonlinearScalar) {
      spec.scalar_nonlinearity =
          scalar_nonlinearity_from_string(require(doc, "nonlinearity").get<std::string>());
    }
    if (spec.family == Family::Network) {
      spec.network = parse_network(require(doc, "network"), n, base_dir);
    }
    return spec;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model spec: ") + e.what());
  }
}

json spec_to_json(const ModelSpec& spec) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["family"] = std::string(to_string(spec.family));
  doc["n_series"] = spec.n_series;
  doc["lags"] = {{"s", spec.lags.s}, {"q", spec.lags.q}};
  json params = json::object();
  if (spec.family == Family::NonlinearInteractive && spec.interactive_nonlinearity) {
    const auto& b = *spec.interactive_nonlinearity;
    params = {{"kappa", b.kappa}, {"c", b.c},           {"a", b.a},         {"local_y", b.local_y},
              {"local_p", b.local_p}, {"gamma", b.gamma}, {"beta", b.beta_lags}};
    doc["nonlinearity"] = {{"own", std::string(to_string(b.own))},
                           {"local", std::string(to_string(b.local))},
                           {"aggregate", std::string(to_string(b.aggregate))},
                           {"cap", b.cap}};
  } else {
    json omega = json::array(), alpha = json::array(), beta = json::array(), gamma = json::array();
    for (const auto& c : spec.series) {
      omega.push_back(c.omega);
      alpha.push_back(c.alpha);
      beta.push_back(c.beta);
      gamma.push_back(c.gamma);
    }
    params = {{"omega", omega}, {"alpha", alpha}, {"beta", beta}, {"gamma", gamma}};
    if (spec.scalar_nonlinearity) doc["nonlinearity"] = std::string(to_string(*spec.scalar_nonlinearity));
  }
  doc["params"] = params;
  if (spec.network) {
    const Matrix w(*spec.network);
    json rows = json::array();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      std::vector<double> r(static_cast<std::size_t>(w.cols()));
      for (Eigen::Index j = 0; j < w.cols(); ++j) r[static_cast<std::size_t>(j)] = w(i, j);
      rows.push_back(r);
    }
    doc["network"] = rows;
  }
  return doc;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t spec_hash(const ModelSpec& spec) { return fnv1a64(spec_to_json(spec).dump()); }

SimConfig sim_config_from_json(const json& doc) {
  try {
    SimConfig cfg;
    if (doc.is_null()) return cfg;
    cfg.seed = value_or(doc, "seed", 0).get<std::uint64_t>();
    cfg.horizon = value_or(doc, "horizon", cfg.horizon).get<int>();
    cfg.burn_in = value_or(doc, "burn_in", cfg.burn_in).get<int>();
    cfg.threads = value_or(doc, "threads", cfg.threads).get<int>();
    if (cfg.horizon < 1) throw ValidationError("horizon must be >= 1");
    if (cfg.burn_in < 0) throw ValidationError("burn_in must be >= 0");
    if (doc.contains("init")) {
      const auto& init = doc.at("init");
      const std::string type = value_or(init, "type", "stationary_warmup").get<std::string>();
      if (type == "fixed") {
        FixedInit fixed;
        const json& p = require(init, "p");
        if (p.is_number()) {
          fixed.p = {{p.get<double>()}};
        } else if (!p.empty() && p.front().is_array()) {
          fixed.p = p.get<std::vector<std::vector<double>>>();
        } else {
          fixed.p = {p.get<std::vector<double>>()};
        }
        if (init.contains("y")) {
          const json& y = init.at("y");
          if (y.is_number()) {
            fixed.y = {{y.get<std::uint8_t>()}};
          } else if (!y.empty() && y.front().is_array()) {
            fixed.y = y.get<std::vector<std::vector<std::uint8_t>>>();
          } else {
            fixed.y = {y.get<std::vector<std::uint8_t>>()};
          }
        }
        cfg.init = std::move(fixed);
      } else if (type == "stationary_warmup") {
        cfg.init = StationaryWarmup{value_or(init, "extra", 0).get<int>()};
      } else {
        throw ParseError("unknown init type '" + type + "'");
      }
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed simulation config: ") + e.what());
  }
}

json sim_config_to_json(const SimConfig& cfg) {
  json doc = {{"seed", cfg.seed}, {"horizon", cfg.horizon}, {"burn_in", cfg.burn_in},
              {"threads", cfg.threads}};
  if (const auto* f = std::get_if<FixedInit>(&cfg.init)) {
    doc["init"] = {{"type", "fixed"}, {"p", f->p}};
    if (!f->y.empty()) doc["init"]["y"] = f->y;
  } else {
    doc["init"] = {{"type", "stationary_warmup"}, {"extra", std::get<StationaryWarmup>(cfg.init).extra}};
  }
  return doc;
}

Matrix load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      ++col;
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": column " +
                         std::to_string(col) + " is not a number");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ShapeMismatch(path.string() + ":" + std::to_string(lineno) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace gab
