#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sdcons/errors.hpp"
#include "sdcons/matrix.hpp"
#include "sdcons/numerics.hpp"

namespace sdcons::graph {

inline constexpr double kBalanceTolerance = 1e-12;

// Weighted digraph on N agents. weight(i, j) is the weight of the edge that
// carries information from agent j into agent i; agent j is then a neighbor
// of agent i.
class WeightedDigraph {
 public:
  explicit WeightedDigraph(std::size_t n) : w_(check_size(n), n) {}

  explicit WeightedDigraph(Matrix weights) : w_(std::move(weights)) {
    if (!w_.is_square()) throw ShapeError("WeightedDigraph: weight matrix not square");
    check_size(w_.rows());
    for (std::size_t i = 0; i < w_.rows(); ++i)
      for (std::size_t j = 0; j < w_.cols(); ++j) validate(i, j, w_(i, j));
  }

  std::size_t size() const noexcept { return w_.rows(); }
  double weight(std::size_t i, std::size_t j) const { return w_(i, j); }
  const Matrix& weights() const noexcept { return w_; }

  void set_weight(std::size_t i, std::size_t j, double w) {
    if (i >= size() || j >= size()) throw ShapeError("WeightedDigraph: node index out of range");
    validate(i, j, w);
    w_(i, j) = w;
  }

  // Sets both directions to w.
  void set_undirected(std::size_t i, std::size_t j, double w) {
    set_weight(i, j, w);
    set_weight(j, i, w);
  }

  double in_degree(std::size_t i) const {
    double d = 0.0;
    for (double v : w_.row(i)) d += v;
    return d;
  }

  WeightedDigraph scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) throw DomainError("WeightedDigraph::scaled: factor must be positive");
    return WeightedDigraph(w_ * factor);
  }

  friend bool operator==(const WeightedDigraph&, const WeightedDigraph&) = default;

 private:
  static std::size_t check_size(std::size_t n) {
    if (n < 2) throw DomainError("WeightedDigraph: need at least 2 agents");
    return n;
  }
  static void validate(std::size_t i, std::size_t j, double w) {
    if (!std::isfinite(w) || w < 0.0) throw DomainError("WeightedDigraph: weights must be finite and >= 0");
    if (i == j && w != 0.0) throw DomainError("WeightedDigraph: self-loops are not allowed");
  }

  Matrix w_;
};

// L = D − W, D = diag(in-degrees).
inline Matrix laplacian(const WeightedDigraph& g) {
  const std::size_t n = g.size();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      l(i, j) = -g.weight(i, j);
      d += g.weight(i, j);
    }
    l(i, i) = d;
  }
  return l;
}

inline bool is_balanced(const WeightedDigraph& g, double tol = kBalanceTolerance) {
  if (tol < 0.0) throw DomainError("is_balanced: tolerance must be >= 0");
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j)
      if (std::abs(g.weight(i, j) - g.weight(j, i)) > tol) return false;
  return true;
}

// True iff some root reaches every node following information flow
// (j → i whenever weight(i, j) > 0).
inline bool has_spanning_tree(const WeightedDigraph& g) {
  const std::size_t n = g.size();
  std::vector<char> seen(n);
  std::vector<std::size_t> stack;
  for (std::size_t root = 0; root < n; ++root) {
    std::fill(seen.begin(), seen.end(), 0);
    seen[root] = 1;
    stack.assign(1, root);
    std::size_t reached = 1;
    while (!stack.empty()) {
      const std::size_t j = stack.back();
      stack.pop_back();
      for (std::size_t i = 0; i < n; ++i)
        if (!seen[i] && g.weight(i, j) > 0.0) {
          seen[i] = 1;
          ++reached;
          stack.push_back(i);
        }
    }
    if (reached == n) return true;
  }
  return false;
}

struct SpectrumSummary {
  std::vector<Complex> eigenvalues;  // ascending by real part
  double lambda2 = 0.0;
  double lambdaN = 0.0;
};

// Exact Laplacian spectrum of a balanced graph (symmetric eigensolver).
inline SpectrumSummary spectrum(const WeightedDigraph& g) {
  if (!is_balanced(g))
    throw UnsupportedError("spectrum: exact spectrum requires a balanced graph; use gershgorin_envelope");
  const auto ev = numerics::symmetric_eigenvalues(laplacian(g));
  SpectrumSummary s;
  for (double v : ev) s.eigenvalues.emplace_back(v, 0.0);
  s.lambda2 = ev[1];
  s.lambdaN = ev.back();
  return s;
}

// For general digraphs: every eigenvalue lies in |z − d_max| ≤ d_max, so the
// largest modulus is at most 2·d_max. No lower bound on λ₂ is available.
struct SpectralEnvelope {
  std::optional<double> lambda2;
  double lambdaN = 0.0;
};

inline SpectralEnvelope gershgorin_envelope(const WeightedDigraph& g) {
  double dmax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) dmax = std::max(dmax, g.in_degree(i));
  return {std::nullopt, 2.0 * dmax};
}

// Mbar: N×(N−1), orthonormal columns orthogonal to the all-ones vector.
struct ReductionBasis {
  Matrix mbar;
  std::size_t agents() const noexcept { return mbar.rows(); }
};

// Helmert basis: column k has 1/√(k(k+1)) in its first k entries and
// −k/√(k(k+1)) in entry k.
inline ReductionBasis reduction_basis(std::size_t n) {
  if (n < 2) throw DomainError("reduction_basis: need N >= 2");
  Matrix m(n, n - 1);
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const double k = static_cast<double>(c + 1);
    const double s = 1.0 / std::sqrt(k * (k + 1.0));
    for (std::size_t r = 0; r <= c; ++r) m(r, c) = s;
    m(c + 1, c) = -k * s;
  }
  return {std::move(m)};
}

// MbarᵀL·Mbar without the balancedness requirement. For any L with L·1 = 0
// its eigenvalues are those of L with one zero removed.
inline Matrix project_laplacian(const Matrix& l, const ReductionBasis& basis) {
  if (l.rows() != basis.agents()) throw ShapeError("project_laplacian: basis does not match graph size");
  return basis.mbar.transpose() * l * basis.mbar;
}

// L̄ = MbarᵀL·Mbar for balanced graphs (symmetric).
inline Matrix reduced_laplacian(const WeightedDigraph& g, const ReductionBasis& basis) {
  if (!is_balanced(g))
    throw UnsupportedError("reduced_laplacian: graph is not balanced");
  Matrix lbar = project_laplacian(laplacian(g), basis);
  // Symmetrize away rounding so downstream symmetric solvers see exact symmetry.
  for (std::size_t i = 0; i < lbar.rows(); ++i)
    for (std::size_t j = i + 1; j < lbar.cols(); ++j) {
      const double v = 0.5 * (lbar(i, j) + lbar(j, i));
      lbar(i, j) = v;
      lbar(j, i) = v;
    }
  return lbar;
}

// Scales g by a single factor so that [λ₂, λ_N] lands inside [lo, hi]; the
// factor is the geometric mean of the admissible range. Returns nullopt when
// the graph is disconnected or its spectral ratio exceeds hi/lo.
inline std::optional<WeightedDigraph> fit_to_band(const WeightedDigraph& g, double lo, double hi) {
  if (!(lo > 0.0) || !(hi >= lo)) throw DomainError("fit_to_band: need 0 < lo <= hi");
  const auto s = spectrum(g);
  if (!(s.lambda2 > 1e-8)) return std::nullopt;
  // Eigenvalue round-off is tolerated at 1e-12 relative so that exact-ratio bands fit.
  constexpr double tol = 1e-12;
  if (s.lambdaN / s.lambda2 > (hi / lo) * (1.0 + tol)) return std::nullopt;
  const double smin = lo / s.lambda2;
  const double smax = hi / s.lambdaN;
  WeightedDigraph out = g.scaled(std::sqrt(smin * smax));
  const auto check = spectrum(out);
  if (check.lambda2 < lo * (1.0 - tol) || check.lambdaN > hi * (1.0 + tol)) return std::nullopt;
  return out;
}

struct RandomGraphOptions {
  double edge_probability = 0.5;
  int max_attempts = 1000;
};

// Connected balanced graph with λ₂ ≥ lo and λ_N ≤ hi. Samples symmetric
// unit-weight Erdős–Rényi graphs and rescales them into the band; rejects
// disconnected samples and samples whose λ_N/λ₂ exceeds hi/lo.
inline WeightedDigraph random_balanced_graph(std::size_t n, double lambda_lo, double lambda_hi,
                                             std::uint64_t seed, RandomGraphOptions opts = {}) {
  if (n < 2) throw DomainError("random_balanced_graph: need N >= 2");
  if (!(lambda_lo > 0.0) || !(lambda_hi >= lambda_lo))
    throw DomainError("random_balanced_graph: need 0 < lambda_lo <= lambda_hi");
  if (!(opts.edge_probability > 0.0) || opts.edge_probability > 1.0)
    throw DomainError("random_balanced_graph: edge probability must be in (0, 1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution edge(opts.edge_probability);
  double best_ratio = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
    WeightedDigraph g(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (edge(rng)) g.set_undirected(i, j, 1.0);
    if (!has_spanning_tree(g)) continue;
    const auto s = spectrum(g);
    best_ratio = std::min(best_ratio, s.lambdaN / s.lambda2);
    if (auto fitted = fit_to_band(g, lambda_lo, lambda_hi)) return *fitted;
  }
  throw FeasibilityError("random_balanced_graph: no graph fits the eigenvalue band after " +
                             std::to_string(opts.max_attempts) + " attempts (best ratio " +
                             std::to_string(best_ratio) + ", allowed " +
                             std::to_string(lambda_hi / lambda_lo) + ")",
                         best_ratio);
}

}  // namespace sdcons::graph
