#pragma once

// Exact sampled-data simulation of N identical agents
//   x_i⁺ = F(h) x_i + G(h) K Σ_j w_ij (x_j − x_i)
// under random sampling intervals and switching topologies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "sdcons/certify.hpp"
#include "sdcons/errors.hpp"
#include "sdcons/graph.hpp"
#include "sdcons/matrix.hpp"

namespace sdcons::sim {

using certify::PlantModel;
using graph::WeightedDigraph;

// Network state: row i holds agent i's state.
using NetworkState = Matrix;

struct RandomGraphRecipe {
  std::size_t agents = 0;
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  std::size_t pool_size = 5;
  double edge_probability = 0.5;
};

using TopologySource = std::variant<std::vector<WeightedDigraph>, RandomGraphRecipe>;

struct ComponentBounds {
  double lo = 0.0;
  double hi = 0.0;
};

struct SimulationConfig {
  PlantModel plant = PlantModel::double_integrator();
  Matrix K;
  Matrix T;  // transform used for the reduced norm ν
  double hbar = 0.0;
  double h_min = 0.0;
  TopologySource topology;
  std::size_t switch_period = 50;  // 0: never switch after the initial draw
  std::size_t steps = 1000;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::vector<ComponentBounds> initial;  // per state component; empty = defaults
  bool identical_agents = false;
  bool record_states = false;
  bool verify_step_forms = false;
  unsigned threads = 1;
};

// Default initial-state bounds: positions in [−10, 10] and velocities in
// [−1, 1] for the double integrator, [−1, 1] per component otherwise.
inline std::vector<ComponentBounds> default_initial_bounds(const PlantModel& plant) {
  if (plant.kind() == certify::PlantKind::DoubleIntegrator) return {{-10.0, 10.0}, {-1.0, 1.0}};
  return std::vector<ComponentBounds>(plant.states(), {-1.0, 1.0});
}

// Independent stream per (master seed, index, purpose).
inline std::mt19937_64 derive_stream(std::uint64_t master, std::uint64_t index, std::uint32_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), purpose};
  return std::mt19937_64(seq);
}

inline constexpr std::uint32_t kPoolStream = 0x706f6f6c;
inline constexpr std::uint32_t kRunStream = 0x72756e73;

inline std::vector<WeightedDigraph> materialize_pool(const TopologySource& source, std::uint64_t master_seed) {
  if (const auto* pool = std::get_if<std::vector<WeightedDigraph>>(&source)) return *pool;
  const auto& r = std::get<RandomGraphRecipe>(source);
  if (r.pool_size == 0) throw DomainError("random topology recipe: pool_size must be >= 1");
  std::vector<WeightedDigraph> out;
  auto rng = derive_stream(master_seed, 0, kPoolStream);
  for (std::size_t i = 0; i < r.pool_size; ++i)
    out.push_back(graph::random_balanced_graph(r.agents, r.lambda_lo, r.lambda_hi, rng(),
                                               {r.edge_probability, 1000}));
  return out;
}

inline void validate(const SimulationConfig& c, const std::vector<WeightedDigraph>& pool) {
  if (!(c.h_min > 0.0) || !(c.h_min < c.hbar)) throw DomainError("SimulationConfig: need 0 < h_min < hbar");
  if (c.steps < 1 || c.runs < 1) throw DomainError("SimulationConfig: steps and runs must be >= 1");
  certify::require_gain_shape(c.plant, c.K);
  if (c.T.rows() != c.plant.states() || !c.T.is_square()) throw ShapeError("SimulationConfig: T must be n×n");
  if (pool.empty()) throw DomainError("SimulationConfig: empty topology pool");
  for (const auto& g : pool) {
    if (g.size() != pool.front().size()) throw ShapeError("SimulationConfig: pool graphs differ in size");
    if (!graph::is_balanced(g) || !graph::has_spanning_tree(g))
      throw DomainError("SimulationConfig: every pool graph must be balanced with a spanning tree");
  }
  if (!c.initial.empty() && c.initial.size() != c.plant.states())
    throw ShapeError("SimulationConfig: initial bounds must list one range per state component");
}

// Uniform in [h_min, hbar).
inline double sample_interval(std::mt19937_64& rng, double h_min, double hbar) {
  if (!(h_min > 0.0) || !(h_min < hbar)) throw DomainError("sample_interval: need 0 < h_min < hbar");
  return std::uniform_real_distribution<double>(h_min, hbar)(rng);
}

// Agent-wise update with precomputed F(h) and G(h)K.
inline NetworkState step(const NetworkState& x, const WeightedDigraph& g, const Matrix& f, const Matrix& gk) {
  const std::size_t n_agents = x.rows();
  const std::size_t n = x.cols();
  if (g.size() != n_agents) throw ShapeError("step: graph size does not match state");
  NetworkState out(n_agents, n);
  std::vector<double> consensus_error(n);
  for (std::size_t i = 0; i < n_agents; ++i) {
    std::fill(consensus_error.begin(), consensus_error.end(), 0.0);
    for (std::size_t j = 0; j < n_agents; ++j) {
      const double w = g.weight(i, j);
      if (w == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) consensus_error[c] += w * (x(j, c) - x(i, c));
    }
    for (std::size_t r = 0; r < n; ++r) {
      double v = 0.0;
      for (std::size_t c = 0; c < n; ++c) v += f(r, c) * x(i, c) + gk(r, c) * consensus_error[c];
      out(i, r) = v;
    }
  }
  return out;
}

inline NetworkState step(const NetworkState& x, const WeightedDigraph& g, const Matrix& k, double h,
                         const PlantModel& plant) {
  if (x.cols() != plant.states()) throw ShapeError("step: state dimension does not match plant");
  certify::require_gain_shape(plant, k);
  const auto [f, gm] = certify::discretize(plant, h);
  return step(x, g, f, gm * k);
}

// x⁺ = (I_N ⊗ F − L ⊗ G K) x with the full matrix assembled.
inline NetworkState step_kronecker(const NetworkState& x, const WeightedDigraph& g, const Matrix& f,
                                   const Matrix& gk) {
  if (g.size() != x.rows()) throw ShapeError("step_kronecker: graph size does not match state");
  const Matrix phi = kron(Matrix::identity(g.size()), f) - kron(graph::laplacian(g), gk);
  const auto y = phi * x.data();
  NetworkState out(x.rows(), x.cols());
  std::copy(y.begin(), y.end(), out.data().begin());
  return out;
}

// max over agent pairs and components of |x_i − x_j|.
inline double disagreement(const NetworkState& x) {
  if (x.rows() < 2) throw DomainError("disagreement: need at least 2 agents");
  double d = 0.0;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double lo = x(0, c), hi = x(0, c);
    for (std::size_t i = 1; i < x.rows(); ++i) {
      lo = std::min(lo, x(i, c));
      hi = std::max(hi, x(i, c));
    }
    d = std::max(d, hi - lo);
  }
  return d;
}

// ‖(I ⊗ T⁻¹) ξ‖₂ with ξ = (Mbarᵀ ⊗ I_n) x.
inline double reduced_norm(const NetworkState& x, const graph::ReductionBasis& basis, const Matrix& t_inv) {
  if (basis.agents() != x.rows()) throw ShapeError("reduced_norm: basis does not match agent count");
  if (t_inv.rows() != x.cols() || !t_inv.is_square()) throw ShapeError("reduced_norm: T does not match state dimension");
  const std::size_t n = x.cols();
  std::vector<double> xi(n);
  double sum = 0.0;
  for (std::size_t b = 0; b < basis.mbar.cols(); ++b) {
    std::fill(xi.begin(), xi.end(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double m = basis.mbar(i, b);
      if (m == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) xi[c] += m * x(i, c);
    }
    const auto z = t_inv * std::span<const double>(xi);
    for (double v : z) sum += v * v;
  }
  return std::sqrt(sum);
}

struct StepRecord {
  std::size_t k = 0;
  double t = 0.0;
  double h = 0.0;        // interval applied from t_k; 0 on the final row
  int topology_id = -1;  // pool index applied from t_k; −1 on the final row
  double delta = 0.0;
  double nu = 0.0;
};

struct TrajectoryRecord {
  std::size_t run_id = 0;
  std::vector<StepRecord> steps;
  std::vector<NetworkState> states;  // only with record_states
  double max_step_form_gap = 0.0;    // only with verify_step_forms
  bool nu_strictly_decreasing = true;
};

struct BatchResult {
  std::vector<TrajectoryRecord> runs;
  std::vector<double> aggregate_delta;  // per k, max over runs
  std::vector<WeightedDigraph> pool;
};

class UncertifiedGainError : public std::runtime_error {
 public:
  explicit UncertifiedGainError(certify::ContractionCertificate cert)
      : std::runtime_error("gain is not certified (verdict " + std::string(certify::to_string(cert.verdict)) +
                           "); pass force to simulate anyway"),
        certificate_(std::move(cert)) {}
  const certify::ContractionCertificate& certificate() const noexcept { return certificate_; }

 private:
  certify::ContractionCertificate certificate_;
};

struct RunGuard {
  std::optional<certify::ContractionCertificate> certificate;
  bool force = false;
};

// ν must drop strictly on every step until it falls below this floor.
inline constexpr double kNuFloor = 1e-12;

inline TrajectoryRecord simulate_one(const SimulationConfig& c, const std::vector<WeightedDigraph>& pool,
                                     std::size_t run_id) {
  const std::size_t n_agents = pool.front().size();
  const std::size_t n = c.plant.states();
  const auto basis = graph::reduction_basis(n_agents);
  const Matrix t_inv = inverse(c.T);
  const auto bounds = c.initial.empty() ? default_initial_bounds(c.plant) : c.initial;
  auto rng = derive_stream(c.seed, run_id, kRunStream);

  NetworkState x(n_agents, n);
  for (std::size_t i = 0; i < n_agents; ++i)
    for (std::size_t comp = 0; comp < n; ++comp) {
      if (c.identical_agents && i > 0) {
        x(i, comp) = x(0, comp);
        continue;
      }
      x(i, comp) = std::uniform_real_distribution<double>(bounds[comp].lo, bounds[comp].hi)(rng);
    }

  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  TrajectoryRecord rec;
  rec.run_id = run_id;
  rec.steps.reserve(c.steps + 1);
  double t = 0.0;
  double nu = reduced_norm(x, basis, t_inv);
  std::size_t topo = pick(rng);
  for (std::size_t k = 0; k < c.steps; ++k) {
    if (k > 0 && c.switch_period > 0 && k % c.switch_period == 0) topo = pick(rng);
    const double h = sample_interval(rng, c.h_min, c.hbar);
    rec.steps.push_back({k, t, h, static_cast<int>(topo), disagreement(x), nu});
    if (c.record_states) rec.states.push_back(x);

    const auto [f, g] = certify::discretize(c.plant, h);
    const Matrix gk = g * c.K;
    NetworkState next = step(x, pool[topo], f, gk);
    if (c.verify_step_forms) {
      const NetworkState alt = step_kronecker(x, pool[topo], f, gk);
      rec.max_step_form_gap = std::max(rec.max_step_form_gap, max_abs_diff(next, alt));
    }
    x = std::move(next);
    t += h;
    const double nu_next = reduced_norm(x, basis, t_inv);
    if (nu >= kNuFloor && !(nu_next < nu)) rec.nu_strictly_decreasing = false;
    nu = nu_next;
  }
  rec.steps.push_back({c.steps, t, 0.0, -1, disagreement(x), nu});
  if (c.record_states) rec.states.push_back(x);
  return rec;
}

// Runs the batch. Each run owns the stream derived from (seed, run index), so
// results do not depend on the thread count.
inline BatchResult run(const SimulationConfig& c, const RunGuard& guard = {}) {
  if (!guard.force) {
    if (!guard.certificate) throw UncertifiedGainError(certify::ContractionCertificate{});
    if (guard.certificate->verdict != certify::Verdict::Certified) throw UncertifiedGainError(*guard.certificate);
  }
  BatchResult out;
  out.pool = materialize_pool(c.topology, c.seed);
  validate(c, out.pool);
  out.runs.resize(c.runs);
  const unsigned workers = std::max(1u, std::min<unsigned>(c.threads, static_cast<unsigned>(c.runs)));
  if (workers == 1) {
    for (std::size_t r = 0; r < c.runs; ++r) out.runs[r] = simulate_one(c, out.pool, r);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t r = w; r < c.runs; r += workers) out.runs[r] = simulate_one(c, out.pool, r);
      });
    for (auto& th : pool) th.join();
  }
  out.aggregate_delta.assign(c.steps + 1, 0.0);
  for (const auto& r : out.runs)
    for (const auto& s : r.steps) out.aggregate_delta[s.k] = std::max(out.aggregate_delta[s.k], s.delta);
  return out;
}

}  // namespace sdcons::sim
