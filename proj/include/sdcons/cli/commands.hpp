#pragma once

// Subcommands of the sdcons tool. Exit codes:
//   0 ok / certified, 1 refuted (or failed convergence assertion),
//   2 usage or config error, 3 inconclusive, 4 uncertified gain refused.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sdcons/certify.hpp"
#include "sdcons/cli/config.hpp"
#include "sdcons/cli/format.hpp"
#include "sdcons/errors.hpp"
#include "sdcons/graph.hpp"
#include "sdcons/sim.hpp"
#include "sdcons/synthesis.hpp"

namespace sdcons::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kRefuted = 1,
  kUsage = 2,
  kInconclusive = 3,
  kUncertified = 4,
};

inline int exit_code_for(certify::Verdict v) {
  switch (v) {
    case certify::Verdict::Certified: return kOk;
    case certify::Verdict::Refuted: return kRefuted;
    case certify::Verdict::Inconclusive: return kInconclusive;
  }
  return kInconclusive;
}

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (double v : m.row(i)) r.push_back(v);
    rows.push_back(r);
  }
  return rows;
}

inline json certificate_json(const certify::ContractionCertificate& c) {
  return {{"verdict", certify::to_string(c.verdict)},
          {"method", certify::to_string(c.method)},
          {"worst_sigma", c.worst_sigma},
          {"margin", c.margin},
          {"worst_point",
           {{"h", c.worst_point.h}, {"lambda_re", c.worst_point.lambda.real()}, {"lambda_im", c.worst_point.lambda.imag()}}},
          {"grid", {{"h_points", c.grid.h_points}, {"lambda_points", c.grid.lambda_points}, {"guard", c.grid.guard}}},
          {"evaluations", c.evaluations},
          {"note", c.note}};
}

inline void print_design(std::ostream& out, const synthesis::GainDesign& g) {
  out << "mu1 = " << shortest(g.mu1) << '\n'
      << "mu2 = " << shortest(g.mu2) << '\n'
      << "k1 = " << shortest(g.k1) << '\n'
      << "k2 = " << shortest(g.k2) << '\n'
      << "T = [[" << shortest(g.T(0, 0)) << ", " << shortest(g.T(0, 1)) << "], [" << shortest(g.T(1, 0)) << ", "
      << shortest(g.T(1, 1)) << "]]\n"
      << "K = [" << shortest(g.K(0, 0)) << ", " << shortest(g.K(0, 1)) << "]\n"
      << "K (4 dp) = [" << fixed4(g.K(0, 0)) << ", " << fixed4(g.K(0, 1)) << "]\n";
  if (g.delta_k_adjusted) out << "note: k2 - k1 = 0.9d misses the limits here; centred in its admissible range\n";
}

// ---------------------------------------------------------------- design

struct DesignArgs {
  double hbar = 0.0;
  double lambda2 = 0.0;
  double lambdaN = 0.0;
  std::optional<double> mu1;
  std::optional<double> mu2;
  bool json_output = false;
};

inline int cmd_design(const DesignArgs& a, std::ostream& out, std::ostream& err) {
  try {
    const synthesis::DesignSpec spec{a.hbar, a.lambda2, a.lambdaN};
    spec.validate();
    if (a.mu1.has_value() != a.mu2.has_value()) throw DomainError("give both --mu1 and --mu2 or neither");
    const auto g = a.mu1 ? synthesis::design_with_mu(spec, *a.mu1, *a.mu2) : synthesis::design(spec);
    if (a.json_output) {
      const auto l = synthesis::limits(spec, g.mu1, g.mu2);
      out << json{{"mu1", g.mu1}, {"mu2", g.mu2}, {"k1", g.k1}, {"k2", g.k2}, {"T", matrix_json(g.T)},
                  {"K", matrix_json(g.K)}, {"delta_k_adjusted", g.delta_k_adjusted}, {"limits", {{"a", l.a}, {"b", l.b}, {"c", l.c}, {"d", l.d}}}}
                 .dump(2)
          << '\n';
    } else {
      print_design(out, g);
    }
    return kOk;
  } catch (const std::invalid_argument& e) {
    err << "design: " << e.what() << '\n';
    return kUsage;
  }
}

// ---------------------------------------------------------------- shared setup

struct Prepared {
  certify::PlantModel plant = certify::PlantModel::double_integrator();
  std::vector<graph::WeightedDigraph> pool;
  Matrix K;
  Matrix T;
  std::optional<synthesis::GainDesign> design;  // double integrator with known (μ₁, μ₂)
  synthesis::DesignSpec band;                  // hbar and eigenvalue band used for certification
};

inline certify::PlantModel plant_of(const ExperimentConfig& c) {
  return c.plant.kind == "general" ? certify::PlantModel::general(*c.plant.A, *c.plant.B)
                                   : certify::PlantModel::double_integrator();
}

inline sim::TopologySource topology_of(const ExperimentConfig& c) {
  if (c.topology.kind == "random")
    return sim::RandomGraphRecipe{c.topology.agents, c.topology.lambda_lo, c.topology.lambda_hi,
                                  c.topology.pool_size, c.topology.edge_probability};
  return c.topology.graphs;
}

// Materializes the topology pool, determines the certification band and the
// gain. Band mode requires every pool graph to be balanced with a spanning
// tree.
inline Prepared prepare(const ExperimentConfig& c) {
  Prepared p;
  p.plant = plant_of(c);
  try {
    p.pool = sim::materialize_pool(topology_of(c), c.seed);
  } catch (const FeasibilityError& e) {
    throw ConfigError(std::string("topology: ") + e.what());
  }

  double lo = 0.0, hi = 0.0;
  if (c.certify_mode == "band") {
    for (std::size_t i = 0; i < p.pool.size(); ++i) {
      if (!graph::is_balanced(p.pool[i]))
        throw ConfigError("topology graph " + std::to_string(i) +
                          " is not balanced; band certification covers balanced switching topologies only");
      if (!graph::has_spanning_tree(p.pool[i]))
        throw ConfigError("topology graph " + std::to_string(i) + " has no spanning tree");
    }
    lo = std::numeric_limits<double>::infinity();
    for (const auto& g : p.pool) {
      const auto s = graph::spectrum(g);
      lo = std::min(lo, s.lambda2);
      hi = std::max(hi, s.lambdaN);
    }
    if (c.design) {
      lo = std::min(lo, c.design->lambda2);
      hi = std::max(hi, c.design->lambdaN);
    } else if (c.topology.kind == "random") {
      lo = std::min(lo, c.topology.lambda_lo);
      hi = std::max(hi, c.topology.lambda_hi);
    }
  } else {
    if (p.pool.size() != 1) throw ConfigError("certify.mode 'fixed' needs exactly one topology graph");
    if (!graph::has_spanning_tree(p.pool.front())) throw ConfigError("fixed topology has no spanning tree");
    const auto env = graph::gershgorin_envelope(p.pool.front());
    lo = hi = env.lambdaN;
    if (c.design) {
      lo = c.design->lambda2;
      hi = c.design->lambdaN;
    }
  }
  p.band = {c.hbar, lo, hi};

  if (c.gain) {
    p.K = c.gain->K;
    try {
      certify::require_gain_shape(p.plant, p.K);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("gain.K: ") + e.what());
    }
    std::optional<std::pair<double, double>> mu;
    if (c.gain->mu1) mu = {*c.gain->mu1, *c.gain->mu2};
    if (c.gain->T) {
      p.T = *c.gain->T;
      if (!p.T.is_square() || p.T.rows() != p.plant.states()) throw ConfigError("gain.T must be n×n");
    } else {
      if (!mu) {
        // Double integrator without a transform: use the design μ pair.
        const synthesis::DesignSpec s = c.design ? synthesis::DesignSpec{c.design->hbar, c.design->lambda2,
                                                                         c.design->lambdaN}
                                                 : p.band;
        const auto d = synthesis::design(s);
        mu = {d.mu1, d.mu2};
      }
      p.T = synthesis::transform(mu->first, mu->second);
    }
    if (mu && p.plant.kind() == certify::PlantKind::DoubleIntegrator) {
      const Matrix kt = p.K * p.T;
      synthesis::GainDesign g;
      g.mu1 = mu->first;
      g.mu2 = mu->second;
      g.k1 = kt(0, 0);
      g.k2 = kt(0, 1);
      g.T = p.T;
      g.K = p.K;
      p.design = g;
    }
  } else {
    const synthesis::DesignSpec s =
        c.design ? synthesis::DesignSpec{c.design->hbar, c.design->lambda2, c.design->lambdaN}
                 : synthesis::DesignSpec{c.hbar, p.band.lambda2, p.band.lambdaN};
    try {
      p.design = c.design && c.design->mu1 ? synthesis::design_with_mu(s, *c.design->mu1, *c.design->mu2)
                                           : synthesis::design(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("design: ") + e.what());
    }
    p.K = p.design->K;
    p.T = p.design->T;
  }
  return p;
}

inline certify::ContractionCertificate certificate_for(const ExperimentConfig& c, const Prepared& p) {
  const certify::GridSpec grid{c.h_points, c.lambda_points, c.guard, std::max(1u, c.threads)};
  if (c.certify_mode == "fixed") {
    const auto lam = certify::fixed_topology_lambdas(p.pool.front());
    if (!lam.diagonalizable) {
      certify::ContractionCertificate cert;
      cert.verdict = certify::Verdict::Inconclusive;
      cert.grid = grid;
      cert.note = "reduced Laplacian is not (numerically) diagonalizable";
      return cert;
    }
    return certify::certify_grid(p.plant, p.K, p.T, c.hbar, lam.values, grid);
  }
  if (p.design) return certify::certify_double_integrator(p.band, *p.design, grid);
  return certify::certify_grid(p.plant, p.K, p.T, c.hbar, certify::LambdaInterval{p.band.lambda2, p.band.lambdaN},
                               grid);
}

// ---------------------------------------------------------------- certify

struct CertifyArgs {
  std::optional<std::string> config;
  std::optional<double> hbar;
  std::optional<double> lambda2;
  std::optional<double> lambdaN;
  std::vector<double> K;
  std::optional<double> mu1;
  std::optional<double> mu2;
  int h_points = 200;
  int lambda_points = 200;
  double guard = 1e-6;
  std::optional<std::string> report;
};

inline void emit_report(const json& report, const std::optional<std::string>& path, std::ostream& out) {
  const auto& cert = report["certificate"];
  out << "verdict: " << cert["verdict"].get<std::string>() << " (" << cert["method"].get<std::string>() << ")\n"
      << "worst sigma: " << shortest(cert["worst_sigma"].get<double>()) << " at h = "
      << shortest(cert["worst_point"]["h"].get<double>()) << ", lambda = "
      << shortest(cert["worst_point"]["lambda_re"].get<double>());
  if (cert["worst_point"]["lambda_im"].get<double>() != 0.0)
    out << (cert["worst_point"]["lambda_im"].get<double>() < 0 ? " - " : " + ")
        << shortest(std::abs(cert["worst_point"]["lambda_im"].get<double>())) << "j";
  out << "\nmargin: " << shortest(cert["margin"].get<double>()) << '\n';
  if (!cert["note"].get<std::string>().empty()) out << "note: " << cert["note"].get<std::string>() << '\n';
  if (path) {
    std::ofstream f(*path);
    if (!f) throw ConfigError("cannot write report '" + *path + "'");
    f << report.dump(2) << '\n';
    out << "report: " << *path << '\n';
  }
}

inline int cmd_certify(const CertifyArgs& a, std::ostream& out, std::ostream& err) {
  try {
    if (a.config) {
      const auto c = load_config(*a.config);
      const auto p = prepare(c);
      const auto cert = certificate_for(c, p);
      json report = {{"certificate", certificate_json(cert)},
                     {"K", matrix_json(p.K)},
                     {"T", matrix_json(p.T)},
                     {"hbar", c.hbar},
                     {"mode", c.certify_mode},
                     {"lambda_band", {p.band.lambda2, p.band.lambdaN}},
                     {"config_digest", config_digest(c)}};
      emit_report(report, a.report, out);
      return exit_code_for(cert.verdict);
    }
    if (!a.hbar || !a.lambda2 || !a.lambdaN) {
      err << "certify: give --config or all of --hbar, --lambda2, --lambdaN\n";
      return kUsage;
    }
    const synthesis::DesignSpec spec{*a.hbar, *a.lambda2, *a.lambdaN};
    spec.validate();
    if (a.mu1.has_value() != a.mu2.has_value()) throw DomainError("give both --mu1 and --mu2 or neither");
    synthesis::GainDesign g;
    if (a.K.empty()) {
      g = a.mu1 ? synthesis::design_with_mu(spec, *a.mu1, *a.mu2) : synthesis::design(spec);
    } else {
      if (a.K.size() != 2) throw DomainError("--K takes two values");
      double mu1, mu2;
      if (a.mu1) {
        mu1 = *a.mu1;
        mu2 = *a.mu2;
      } else {
        const auto d = synthesis::design(spec);
        mu1 = d.mu1;
        mu2 = d.mu2;
      }
      g.mu1 = mu1;
      g.mu2 = mu2;
      g.T = synthesis::transform(mu1, mu2);
      g.K = Matrix::from_rows({{a.K[0], a.K[1]}});
      const Matrix kt = g.K * g.T;
      g.k1 = kt(0, 0);
      g.k2 = kt(0, 1);
    }
    const certify::GridSpec grid{a.h_points, a.lambda_points, a.guard, 1};
    const auto cert = certify::certify_double_integrator(spec, g, grid);
    json report = {{"certificate", certificate_json(cert)},
                   {"K", matrix_json(g.K)},
                   {"T", matrix_json(g.T)},
                   {"mu1", g.mu1},
                   {"mu2", g.mu2},
                   {"hbar", spec.hbar},
                   {"mode", "band"},
                   {"lambda_band", {spec.lambda2, spec.lambdaN}}};
    emit_report(report, a.report, out);
    return exit_code_for(cert.verdict);
  } catch (const ConfigError& e) {
    err << "certify: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "certify: " << e.what() << '\n';
    return kUsage;
  } catch (const UnsupportedError& e) {
    err << "certify: " << e.what() << '\n';
    return kUsage;
  }
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config;
  std::optional<std::string> out_dir;
  bool force = false;
  std::optional<double> assert_convergence;
  bool full_state = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> steps;
};

inline sim::SimulationConfig simulation_config(const ExperimentConfig& c, const Prepared& p) {
  sim::SimulationConfig s;
  s.plant = p.plant;
  s.K = p.K;
  s.T = p.T;
  s.hbar = c.hbar;
  s.h_min = c.h_min;
  s.topology = p.pool;
  s.switch_period = c.switch_period;
  s.steps = c.steps;
  s.runs = c.runs;
  s.seed = c.seed;
  s.initial = c.initial_bounds;
  s.identical_agents = c.identical_agents;
  s.record_states = c.full_state;
  s.threads = std::max(1u, c.threads);
  return s;
}

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  ExperimentConfig c;
  Prepared p;
  certify::ContractionCertificate cert;
  try {
    c = load_config(a.config);
    if (a.out_dir) c.output_dir = *a.out_dir;
    if (a.full_state) c.full_state = true;
    if (a.seed) c.seed = *a.seed;
    if (a.runs) c.runs = *a.runs;
    if (a.steps) c.steps = *a.steps;
    if (c.runs < 1 || c.steps < 1) throw ConfigError("runs and steps must be >= 1");
    p = prepare(c);
    cert = certificate_for(c, p);
  } catch (const ConfigError& e) {
    err << "simulate: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "simulate: " << e.what() << '\n';
    return kUsage;
  } catch (const UnsupportedError& e) {
    err << "simulate: " << e.what() << '\n';
    return kUsage;
  }

  sim::BatchResult batch;
  try {
    batch = sim::run(simulation_config(c, p), sim::RunGuard{cert, a.force});
  } catch (const sim::UncertifiedGainError& e) {
    err << "simulate: " << e.what() << '\n' << certificate_json(e.certificate()).dump(2) << '\n';
    return kUncertified;
  } catch (const std::invalid_argument& e) {
    err << "simulate: " << e.what() << '\n';
    return kUsage;
  }

  namespace fs = std::filesystem;
  const fs::path dir(c.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "simulate: cannot create output directory '" << c.output_dir << "': " << ec.message() << '\n';
    return kUsage;
  }
  json outputs = {{"trajectories", (dir / "trajectories.csv").string()},
                  {"aggregate", (dir / "aggregate.csv").string()},
                  {"manifest", (dir / "manifest.json").string()}};
  {
    std::ofstream f(dir / "trajectories.csv");
    write_trajectory_csv(f, batch);
  }
  {
    std::ofstream f(dir / "aggregate.csv");
    write_aggregate_csv(f, batch);
  }
  if (c.full_state) {
    std::ofstream f(dir / "states.csv");
    write_state_csv(f, batch);
    outputs["states"] = (dir / "states.csv").string();
  }

  const double d0 = batch.aggregate_delta.front();
  const double dend = batch.aggregate_delta.back();
  bool converged = true;
  if (a.assert_convergence) converged = dend <= *a.assert_convergence * d0;
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json manifest = {{"config_digest", config_digest(c)},
                   {"tool_version", kVersion},
                   {"master_seed", c.seed},
                   {"outputs", outputs},
                   {"timing", {{"wall_seconds", wall}}},
                   {"certificate", certificate_json(cert)},
                   {"forced", a.force},
                   {"aggregate", {{"initial_delta", d0}, {"final_delta", dend}}},
                   {"resolved_config", to_json(c)}};
  {
    std::ofstream f(dir / "manifest.json");
    f << manifest.dump(2) << '\n';
  }
  out << "runs: " << c.runs << ", steps: " << c.steps << ", agents: " << p.pool.front().size() << '\n'
      << "certificate: " << certify::to_string(cert.verdict) << (a.force ? " (forced)" : "") << '\n'
      << "aggregate delta: initial " << shortest(d0) << ", final " << shortest(dend) << '\n'
      << "output: " << c.output_dir << '\n';
  if (!converged) {
    err << "simulate: convergence assertion failed (final/initial = " << shortest(dend / d0) << ")\n";
    return kRefuted;
  }
  return kOk;
}

// ---------------------------------------------------------------- sweep

struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
  int points = 1;
  std::vector<double> values() const {
    if (lo == hi) return {lo};
    std::vector<double> v;
    for (int i = 0; i < points; ++i) v.push_back(points == 1 ? lo : lo + (hi - lo) * i / (points - 1));
    return v;
  }
};

// "v" or "lo:hi:n".
inline AxisRange parse_axis(const std::string& s, const char* name) {
  AxisRange r;
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  try {
    if (parts.size() == 1) {
      r.lo = r.hi = std::stod(parts[0]);
      r.points = 1;
    } else if (parts.size() == 3) {
      r.lo = std::stod(parts[0]);
      r.hi = std::stod(parts[1]);
      r.points = std::stoi(parts[2]);
    } else {
      throw ConfigError("");
    }
  } catch (const std::exception&) {
    throw ConfigError(std::string("--") + name + " must be 'value' or 'lo:hi:n'");
  }
  if (r.points < 1 || r.hi < r.lo) throw ConfigError(std::string("--") + name + ": empty range");
  return r;
}

struct SweepArgs {
  std::string hbar = "1";
  std::string ratio = "1:50:50";
  double lambda2 = 1.0;
  std::optional<double> mu1;
  std::optional<double> mu2;
  int h_points = 50;
  int lambda_points = 50;
  double guard = 1e-6;
  std::optional<std::string> config;
  std::optional<std::string> out;
};

inline void write_sweep_header(std::ostream& os) {
  os << "hbar,lambda2,lambdaN,ratio,mu1,mu2,feasible,k1,k2,K1,K2,verdict,worst_sigma,margin\n";
}

// One cell: feasibility of (μ₁, μ₂) and, when feasible, the design and its
// certificate.
inline void sweep_cell(std::ostream& os, double hbar, double lambda2, double ratio, std::optional<double> mu1,
                       std::optional<double> mu2, const certify::GridSpec& grid) {
  const synthesis::DesignSpec spec{hbar, lambda2, lambda2 * ratio};
  spec.validate();
  double m1, m2;
  if (mu1) {
    m1 = *mu1;
    m2 = *mu2;
  } else {
    const double a1 = hbar / 2.0;
    m1 = a1;
    m2 = -a1 + 2.0 * hbar * spec.lambdaN / spec.lambda2 + 1.0;
  }
  const bool feasible = synthesis::is_feasible(spec, m1, m2);
  os << shortest(hbar) << ',' << shortest(lambda2) << ',' << shortest(spec.lambdaN) << ',' << shortest(ratio) << ','
     << shortest(m1) << ',' << shortest(m2) << ',' << (feasible ? 1 : 0) << ',';
  std::optional<synthesis::GainDesign> g;
  if (feasible) {
    try {
      g = synthesis::design_with_mu(spec, m1, m2);
    } catch (const DomainError&) {
    }
  }
  if (!g) {
    os << ",,,,infeasible,,\n";
    return;
  }
  const auto cert = certify::certify_double_integrator(spec, *g, grid);
  os << shortest(g->k1) << ',' << shortest(g->k2) << ',' << shortest(g->K(0, 0)) << ',' << shortest(g->K(0, 1))
     << ',' << certify::to_string(cert.verdict) << ',' << shortest(cert.worst_sigma) << ','
     << shortest(cert.margin) << '\n';
}

inline int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  try {
    certify::GridSpec grid{a.h_points, a.lambda_points, a.guard, 1};
    if (a.config) {
      const auto c = load_config(*a.config);
      grid = {c.h_points, c.lambda_points, c.guard, 1};
    }
    const auto hb = parse_axis(a.hbar, "hbar");
    const auto ra = parse_axis(a.ratio, "ratio");
    if (!(a.lambda2 > 0.0)) throw ConfigError("--lambda2 must be > 0");
    if (!(ra.lo >= 1.0)) throw ConfigError("--ratio values must be >= 1");
    if (!(hb.lo > 0.0)) throw ConfigError("--hbar values must be > 0");
    if (a.mu1.has_value() != a.mu2.has_value()) throw ConfigError("give both --mu1 and --mu2 or neither");
    if (a.mu1) synthesis::require_mu_order(*a.mu1, *a.mu2);
    std::ostringstream table;
    write_sweep_header(table);
    for (double h : hb.values())
      for (double r : ra.values()) sweep_cell(table, h, a.lambda2, r, a.mu1, a.mu2, grid);
    if (a.out) {
      std::ofstream f(*a.out);
      if (!f) throw ConfigError("cannot write '" + *a.out + "'");
      f << table.str();
    } else {
      out << table.str();
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << "sweep: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "sweep: " << e.what() << '\n';
    return kUsage;
  }
}

// ---------------------------------------------------------------- entry point

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sampled-data consensus design, certification and simulation"};
  app.name("sdcons");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  DesignArgs da;
  auto* design = app.add_subcommand("design", "Closed-form gain design for double-integrator agents");
  design->add_option("--hbar", da.hbar, "Maximum sampling interval")->required();
  design->add_option("--lambda2", da.lambda2, "Lower Laplacian eigenvalue bound")->required();
  design->add_option("--lambdaN", da.lambdaN, "Upper Laplacian eigenvalue bound")->required();
  design->add_option("--mu1", da.mu1, "Transform parameter mu1 (default hbar/2)");
  design->add_option("--mu2", da.mu2, "Transform parameter mu2");
  design->add_flag("--json", da.json_output, "Print JSON");

  CertifyArgs ca;
  auto* cert = app.add_subcommand("certify", "Contraction certificate for a gain");
  cert->add_option("--config", ca.config, "Experiment config file");
  cert->add_option("--hbar", ca.hbar);
  cert->add_option("--lambda2", ca.lambda2);
  cert->add_option("--lambdaN", ca.lambdaN);
  cert->add_option("--K", ca.K, "Gain row k1 k2 (default: designed gain)")->expected(2);
  cert->add_option("--mu1", ca.mu1);
  cert->add_option("--mu2", ca.mu2);
  cert->add_option("--h-points", ca.h_points)->check(CLI::PositiveNumber);
  cert->add_option("--lambda-points", ca.lambda_points)->check(CLI::PositiveNumber);
  cert->add_option("--guard", ca.guard)->check(CLI::NonNegativeNumber);
  cert->add_option("--report", ca.report, "Write the JSON report here");

  SimulateArgs sa;
  auto* simc = app.add_subcommand("simulate", "Batch simulation from a config file");
  simc->add_option("--config", sa.config)->required();
  simc->add_option("--out", sa.out_dir, "Output directory (overrides config)");
  simc->add_flag("--force", sa.force, "Simulate even if the gain is not certified");
  simc->add_option("--assert-convergence", sa.assert_convergence,
                   "Fail unless final aggregate delta <= r * initial delta");
  simc->add_flag("--full-state", sa.full_state, "Also write states.csv");
  simc->add_option("--seed", sa.seed);
  simc->add_option("--runs", sa.runs);
  simc->add_option("--steps", sa.steps);

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "Feasibility and margin table over (hbar, lambdaN/lambda2)");
  sweep->add_option("--hbar", wa.hbar, "value or lo:hi:n");
  sweep->add_option("--ratio", wa.ratio, "lambdaN/lambda2 as value or lo:hi:n");
  sweep->add_option("--lambda2", wa.lambda2);
  sweep->add_option("--mu1", wa.mu1, "Fixed mu1 (default: per-cell design value)");
  sweep->add_option("--mu2", wa.mu2);
  sweep->add_option("--h-points", wa.h_points)->check(CLI::PositiveNumber);
  sweep->add_option("--lambda-points", wa.lambda_points)->check(CLI::PositiveNumber);
  sweep->add_option("--config", wa.config, "Take the certification grid from this config");
  sweep->add_option("--out", wa.out, "CSV output path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kUsage;
  }

  if (design->parsed()) return cmd_design(da, out, err);
  if (cert->parsed()) return cmd_certify(ca, out, err);
  if (simc->parsed()) return cmd_simulate(sa, out, err);
  return cmd_sweep(wa, out, err);
}

}  // namespace sdcons::cli
