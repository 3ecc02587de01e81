#pragma once

// Experiment config (JSON). Sections:
//
//   plant     {"kind": "double_integrator"} or {"kind": "general", "A": [[..]], "B": [[..]]}
//   design    {"hbar", "lambda2", "lambdaN", optional "mu1", "mu2"}
//   gain      {"K": [[..]], and "T": [[..]] or "mu1"/"mu2"}   (overrides design)
//   topology  {"kind": "random", "agents", "lambda_band": [lo, hi], "pool_size", "edge_probability"}
//             {"kind": "graphs", "graphs": [{"agents", "symmetric", "edges": [[i, j, w], ..]} | {"file": path}]}
//   sampling  {"hbar", "h_min"}
//   schedule  {"steps", "switch_period"}        (switch_period 0: fixed topology)
//   batch     {"runs", "seed", "threads"}
//   initial   {"bounds": [[lo, hi], ..], "identical": bool}
//   certify   {"mode": "band" | "fixed", "h_points", "lambda_points", "guard"}
//   output    {"dir", "full_state"}
//
// resolve_config() fills every default and inlines graph files; the resolved
// form is what gets hashed into the run manifest.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"
#include "sdcons/certify.hpp"
#include "sdcons/cli/graph_io.hpp"
#include "sdcons/errors.hpp"
#include "sdcons/graph.hpp"
#include "sdcons/matrix.hpp"

namespace sdcons::cli {

using nlohmann::json;

struct PlantSection {
  std::string kind = "double_integrator";
  std::optional<Matrix> A;
  std::optional<Matrix> B;
  bool operator==(const PlantSection&) const = default;
};

struct DesignSection {
  double hbar = 0.0;
  double lambda2 = 0.0;
  double lambdaN = 0.0;
  std::optional<double> mu1;
  std::optional<double> mu2;
  bool operator==(const DesignSection&) const = default;
};

struct GainSection {
  Matrix K;
  std::optional<Matrix> T;
  std::optional<double> mu1;
  std::optional<double> mu2;
  bool operator==(const GainSection&) const = default;
};

struct TopologySection {
  std::string kind = "random";
  // random
  std::size_t agents = 0;
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  std::size_t pool_size = 5;
  double edge_probability = 0.5;
  // graphs
  std::vector<graph::WeightedDigraph> graphs;
  bool operator==(const TopologySection&) const = default;
};

struct ExperimentConfig {
  PlantSection plant;
  std::optional<DesignSection> design;
  std::optional<GainSection> gain;
  TopologySection topology;
  double hbar = 0.0;
  double h_min = 0.0;
  std::size_t steps = 1000;
  std::size_t switch_period = 50;
  std::size_t runs = 100;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::vector<sim::ComponentBounds> initial_bounds;
  bool identical_agents = false;
  std::string certify_mode = "band";
  int h_points = 200;
  int lambda_points = 200;
  double guard = 1e-6;
  std::string output_dir = "sdcons_out";
  bool full_state = false;

  bool operator==(const ExperimentConfig& o) const {
    auto bounds_eq = [](const auto& a, const auto& b) {
      if (a.size() != b.size()) return false;
      for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].lo != b[i].lo || a[i].hi != b[i].hi) return false;
      return true;
    };
    return plant == o.plant && design == o.design && gain == o.gain && topology == o.topology &&
           hbar == o.hbar && h_min == o.h_min && steps == o.steps && switch_period == o.switch_period &&
           runs == o.runs && seed == o.seed && threads == o.threads &&
           bounds_eq(initial_bounds, o.initial_bounds) && identical_agents == o.identical_agents &&
           certify_mode == o.certify_mode && h_points == o.h_points && lambda_points == o.lambda_points &&
           guard == o.guard && output_dir == o.output_dir && full_state == o.full_state;
  }
};

namespace detail {

inline void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  return obj.contains(key) ? get<T>(obj, key, where) : fallback;
}

template <typename T>
std::optional<T> get_opt(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  return get<T>(obj, key, where);
}

inline Matrix matrix_from(const json& j, const std::string& where) {
  try {
    return Matrix::from_rows(j.get<std::vector<std::vector<double>>>());
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline json matrix_to(const Matrix& m) { return m.to_rows(); }

inline graph::WeightedDigraph graph_from(const json& j, const std::string& where,
                                         const std::filesystem::path& base_dir) {
  if (j.contains("file")) {
    only_keys(j, where, {"file"});
    auto p = std::filesystem::path(get<std::string>(j, "file", where));
    if (p.is_relative()) p = base_dir / p;
    return load_graph(p.string());
  }
  only_keys(j, where, {"agents", "symmetric", "edges"});
  const auto n = get<std::size_t>(j, "agents", where);
  const bool sym = get_or<bool>(j, "symmetric", false, where);
  try {
    graph::WeightedDigraph g(n);
    for (const auto& e : get<std::vector<std::vector<double>>>(j, "edges", where)) {
      if (e.size() != 3) throw ConfigError(where + ": each edge must be [i, j, w]");
      const double fi = e[0], fj = e[1];
      if (fi != std::floor(fi) || fj != std::floor(fj) || fi < 1 || fj < 1 || fi > n || fj > n)
        throw ConfigError(where + ": edge index out of range");
      const auto i = static_cast<std::size_t>(fi) - 1, k = static_cast<std::size_t>(fj) - 1;
      if (sym)
        g.set_undirected(i, k, e[2]);
      else
        g.set_weight(i, k, e[2]);
    }
    return g;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline json graph_to(const graph::WeightedDigraph& g) {
  json edges = json::array();
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      if (g.weight(i, j) != 0.0) edges.push_back({static_cast<double>(i + 1), static_cast<double>(j + 1), g.weight(i, j)});
  return {{"agents", g.size()}, {"symmetric", false}, {"edges", edges}};
}

}  // namespace detail

// Parses and resolves defaults. Relative graph file paths resolve against
// base_dir.
inline ExperimentConfig resolve_config(const json& root, const std::filesystem::path& base_dir = ".") {
  using namespace detail;
  only_keys(root, "config",
            {"plant", "design", "gain", "topology", "sampling", "schedule", "batch", "initial", "certify", "output"});
  ExperimentConfig c;

  const json plant = root.value("plant", json::object());
  only_keys(plant, "plant", {"kind", "A", "B"});
  c.plant.kind = get_or<std::string>(plant, "kind", "double_integrator", "plant");
  if (c.plant.kind == "general") {
    c.plant.A = matrix_from(get<json>(plant, "A", "plant"), "plant.A");
    c.plant.B = matrix_from(get<json>(plant, "B", "plant"), "plant.B");
    try {
      (void)certify::PlantModel::general(*c.plant.A, *c.plant.B);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("plant: ") + e.what());
    }
  } else if (c.plant.kind == "double_integrator") {
    if (plant.contains("A") || plant.contains("B")) throw ConfigError("plant: A/B only allowed for kind 'general'");
  } else {
    throw ConfigError("plant.kind must be 'double_integrator' or 'general'");
  }

  if (!root.contains("sampling")) throw ConfigError("config: missing 'sampling'");
  const json& sampling = root["sampling"];
  only_keys(sampling, "sampling", {"hbar", "h_min"});
  c.hbar = get<double>(sampling, "hbar", "sampling");
  if (!(c.hbar > 0.0) || !std::isfinite(c.hbar)) throw ConfigError("sampling.hbar must be > 0");
  c.h_min = get_or<double>(sampling, "h_min", c.hbar * 1e-3, "sampling");
  if (!(c.h_min > 0.0) || !(c.h_min < c.hbar)) throw ConfigError("sampling.h_min must be in (0, hbar)");

  if (root.contains("design")) {
    const json& d = root["design"];
    only_keys(d, "design", {"hbar", "lambda2", "lambdaN", "mu1", "mu2"});
    DesignSection ds;
    ds.hbar = get_or<double>(d, "hbar", c.hbar, "design");
    ds.lambda2 = get<double>(d, "lambda2", "design");
    ds.lambdaN = get<double>(d, "lambdaN", "design");
    ds.mu1 = get_opt<double>(d, "mu1", "design");
    ds.mu2 = get_opt<double>(d, "mu2", "design");
    if (ds.mu1.has_value() != ds.mu2.has_value()) throw ConfigError("design: give both mu1 and mu2 or neither");
    try {
      synthesis::DesignSpec{ds.hbar, ds.lambda2, ds.lambdaN}.validate();
      if (ds.mu1) synthesis::require_mu_order(*ds.mu1, *ds.mu2);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("design: ") + e.what());
    }
    c.design = ds;
  }

  if (root.contains("gain")) {
    const json& g = root["gain"];
    only_keys(g, "gain", {"K", "T", "mu1", "mu2"});
    GainSection gs;
    gs.K = matrix_from(get<json>(g, "K", "gain"), "gain.K");
    if (g.contains("T")) gs.T = matrix_from(g["T"], "gain.T");
    gs.mu1 = get_opt<double>(g, "mu1", "gain");
    gs.mu2 = get_opt<double>(g, "mu2", "gain");
    if (gs.mu1.has_value() != gs.mu2.has_value()) throw ConfigError("gain: give both mu1 and mu2 or neither");
    if (gs.T && gs.mu1) throw ConfigError("gain: give T or mu1/mu2, not both");
    if (gs.mu1) {
      try {
        synthesis::require_mu_order(*gs.mu1, *gs.mu2);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("gain: ") + e.what());
      }
    }
    c.gain = gs;
  }
  if (!c.gain && c.plant.kind != "double_integrator")
    throw ConfigError("config: a general plant needs an explicit 'gain' section");
  if (c.gain && !c.gain->T && !c.gain->mu1 && c.plant.kind != "double_integrator")
    throw ConfigError("gain: a general plant needs 'T'");

  if (!root.contains("topology")) throw ConfigError("config: missing 'topology'");
  const json& t = root["topology"];
  c.topology.kind = get_or<std::string>(t, "kind", "random", "topology");
  if (c.topology.kind == "random") {
    only_keys(t, "topology", {"kind", "agents", "lambda_band", "pool_size", "edge_probability"});
    c.topology.agents = get<std::size_t>(t, "agents", "topology");
    const auto band = get<std::vector<double>>(t, "lambda_band", "topology");
    if (band.size() != 2 || !(band[0] > 0.0) || !(band[1] >= band[0]))
      throw ConfigError("topology.lambda_band must be [lo, hi] with 0 < lo <= hi");
    c.topology.lambda_lo = band[0];
    c.topology.lambda_hi = band[1];
    c.topology.pool_size = get_or<std::size_t>(t, "pool_size", 5, "topology");
    c.topology.edge_probability = get_or<double>(t, "edge_probability", 0.5, "topology");
    if (c.topology.agents < 2) throw ConfigError("topology.agents must be >= 2");
    if (c.topology.pool_size < 1) throw ConfigError("topology.pool_size must be >= 1");
    if (!(c.topology.edge_probability > 0.0) || c.topology.edge_probability > 1.0)
      throw ConfigError("topology.edge_probability must be in (0, 1]");
  } else if (c.topology.kind == "graphs") {
    only_keys(t, "topology", {"kind", "graphs"});
    const json& gs = get<json>(t, "graphs", "topology");
    if (!gs.is_array() || gs.empty()) throw ConfigError("topology.graphs must be a non-empty array");
    for (std::size_t i = 0; i < gs.size(); ++i)
      c.topology.graphs.push_back(graph_from(gs[i], "topology.graphs[" + std::to_string(i) + "]", base_dir));
    for (const auto& g : c.topology.graphs)
      if (g.size() != c.topology.graphs.front().size()) throw ConfigError("topology.graphs differ in agent count");
  } else {
    throw ConfigError("topology.kind must be 'random' or 'graphs'");
  }

  const json schedule = root.value("schedule", json::object());
  only_keys(schedule, "schedule", {"steps", "switch_period"});
  c.steps = get_or<std::size_t>(schedule, "steps", 1000, "schedule");
  c.switch_period = get_or<std::size_t>(schedule, "switch_period", 50, "schedule");
  if (c.steps < 1) throw ConfigError("schedule.steps must be >= 1");

  const json batch = root.value("batch", json::object());
  only_keys(batch, "batch", {"runs", "seed", "threads"});
  c.runs = get_or<std::size_t>(batch, "runs", 100, "batch");
  c.seed = get_or<std::uint64_t>(batch, "seed", 1, "batch");
  c.threads = get_or<unsigned>(batch, "threads", 1, "batch");
  if (c.runs < 1) throw ConfigError("batch.runs must be >= 1");

  const std::size_t n = c.plant.kind == "general" ? c.plant.A->rows() : 2;
  const json initial = root.value("initial", json::object());
  only_keys(initial, "initial", {"bounds", "identical"});
  if (initial.contains("bounds")) {
    for (const auto& b : get<std::vector<std::vector<double>>>(initial, "bounds", "initial")) {
      if (b.size() != 2 || !(b[1] >= b[0])) throw ConfigError("initial.bounds entries must be [lo, hi]");
      c.initial_bounds.push_back({b[0], b[1]});
    }
    if (c.initial_bounds.size() != n) throw ConfigError("initial.bounds needs one range per state component");
  } else {
    const auto plant_model = c.plant.kind == "general" ? certify::PlantModel::general(*c.plant.A, *c.plant.B)
                                                       : certify::PlantModel::double_integrator();
    c.initial_bounds = sim::default_initial_bounds(plant_model);
  }
  c.identical_agents = get_or<bool>(initial, "identical", false, "initial");

  const json cert = root.value("certify", json::object());
  only_keys(cert, "certify", {"mode", "h_points", "lambda_points", "guard"});
  c.certify_mode = get_or<std::string>(cert, "mode", "band", "certify");
  if (c.certify_mode != "band" && c.certify_mode != "fixed") throw ConfigError("certify.mode must be 'band' or 'fixed'");
  c.h_points = get_or<int>(cert, "h_points", 200, "certify");
  c.lambda_points = get_or<int>(cert, "lambda_points", 200, "certify");
  c.guard = get_or<double>(cert, "guard", 1e-6, "certify");
  if (c.h_points < 1 || c.lambda_points < 1) throw ConfigError("certify grid needs >= 1 point per axis");

  const json out = root.value("output", json::object());
  only_keys(out, "output", {"dir", "full_state"});
  c.output_dir = get_or<std::string>(out, "dir", "sdcons_out", "output");
  c.full_state = get_or<bool>(out, "full_state", false, "output");
  return c;
}

// Fully resolved JSON form. Key order is canonical (sorted), so the dump is
// independent of the key order in the source file.
inline json to_json(const ExperimentConfig& c) {
  using namespace detail;
  json j;
  j["plant"] = {{"kind", c.plant.kind}};
  if (c.plant.A) j["plant"]["A"] = matrix_to(*c.plant.A);
  if (c.plant.B) j["plant"]["B"] = matrix_to(*c.plant.B);
  if (c.design) {
    j["design"] = {{"hbar", c.design->hbar}, {"lambda2", c.design->lambda2}, {"lambdaN", c.design->lambdaN}};
    if (c.design->mu1) j["design"]["mu1"] = *c.design->mu1;
    if (c.design->mu2) j["design"]["mu2"] = *c.design->mu2;
  }
  if (c.gain) {
    j["gain"] = {{"K", matrix_to(c.gain->K)}};
    if (c.gain->T) j["gain"]["T"] = matrix_to(*c.gain->T);
    if (c.gain->mu1) j["gain"]["mu1"] = *c.gain->mu1;
    if (c.gain->mu2) j["gain"]["mu2"] = *c.gain->mu2;
  }
  if (c.topology.kind == "random") {
    j["topology"] = {{"kind", "random"},
                     {"agents", c.topology.agents},
                     {"lambda_band", {c.topology.lambda_lo, c.topology.lambda_hi}},
                     {"pool_size", c.topology.pool_size},
                     {"edge_probability", c.topology.edge_probability}};
  } else {
    json gs = json::array();
    for (const auto& g : c.topology.graphs) gs.push_back(graph_to(g));
    j["topology"] = {{"kind", "graphs"}, {"graphs", gs}};
  }
  j["sampling"] = {{"hbar", c.hbar}, {"h_min", c.h_min}};
  j["schedule"] = {{"steps", c.steps}, {"switch_period", c.switch_period}};
  j["batch"] = {{"runs", c.runs}, {"seed", c.seed}, {"threads", c.threads}};
  json bounds = json::array();
  for (const auto& b : c.initial_bounds) bounds.push_back({b.lo, b.hi});
  j["initial"] = {{"bounds", bounds}, {"identical", c.identical_agents}};
  j["certify"] = {{"mode", c.certify_mode},
                  {"h_points", c.h_points},
                  {"lambda_points", c.lambda_points},
                  {"guard", c.guard}};
  j["output"] = {{"dir", c.output_dir}, {"full_state", c.full_state}};
  return j;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return resolve_config(root, std::filesystem::path(path).parent_path());
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

// Content hash of the resolved config.
inline std::string config_digest(const ExperimentConfig& c) { return sha256_hex(to_json(c).dump()); }

}  // namespace sdcons::cli
