#pragma once

// Contraction certificates for the transformed closed loop
//   Ŝ(h, λ) = T⁻¹ (e^{Ah} − λ (∫₀ʰ e^{Aτ}dτ) B K) T.
// σ̄(Ŝ) < 1 for all h ∈ (0, hbar] and all admissible λ gives consensus under
// arbitrary nonuniform sampling.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sdcons/errors.hpp"
#include "sdcons/graph.hpp"
#include "sdcons/matrix.hpp"
#include "sdcons/numerics.hpp"
#include "sdcons/synthesis.hpp"

namespace sdcons::certify {

enum class PlantKind { DoubleIntegrator, General };

class PlantModel {
 public:
  static PlantModel double_integrator() {
    return PlantModel(PlantKind::DoubleIntegrator, Matrix::from_rows({{0.0, 1.0}, {0.0, 0.0}}),
                      Matrix::from_rows({{0.0}, {1.0}}));
  }

  static PlantModel general(Matrix a, Matrix b) {
    if (!a.is_square()) throw ShapeError("PlantModel: A must be square");
    if (b.rows() != a.rows()) throw ShapeError("PlantModel: B row count must equal dim A");
    if (b.cols() > a.rows() || rank(b) != b.cols()) throw DomainError("PlantModel: B must have full column rank");
    return PlantModel(PlantKind::General, std::move(a), std::move(b));
  }

  PlantKind kind() const noexcept { return kind_; }
  const Matrix& A() const noexcept { return a_; }
  const Matrix& B() const noexcept { return b_; }
  std::size_t states() const noexcept { return a_.rows(); }
  std::size_t inputs() const noexcept { return b_.cols(); }

 private:
  PlantModel(PlantKind k, Matrix a, Matrix b) : kind_(k), a_(std::move(a)), b_(std::move(b)) {}

  PlantKind kind_;
  Matrix a_;
  Matrix b_;
};

struct Discretization {
  Matrix F;  // e^{Ah}
  Matrix G;  // (∫₀ʰ e^{Aτ}dτ) B
};

// Exact zero-order-hold discretization. The double integrator uses its closed
// form [[1, h], [0, 1]], [[h²/2], [h]].
inline Discretization discretize(const PlantModel& plant, double h) {
  if (!std::isfinite(h) || h < 0.0) throw DomainError("discretize: h must be finite and >= 0");
  if (plant.kind() == PlantKind::DoubleIntegrator)
    return {Matrix::from_rows({{1.0, h}, {0.0, 1.0}}), Matrix::from_rows({{0.5 * h * h}, {h}})};
  return {numerics::expm(plant.A(), h), numerics::expm_integral(plant.A(), plant.B(), h)};
}

inline void require_gain_shape(const PlantModel& plant, const Matrix& k) {
  if (k.rows() != plant.inputs() || k.cols() != plant.states())
    throw ShapeError("gain K must be m×n for the plant");
}

// S(h, λ) = F(h) − λ G(h) K.
inline ComplexMatrix closed_loop_matrix(const PlantModel& plant, const Matrix& k, Complex lambda, double h) {
  require_gain_shape(plant, k);
  const auto [f, g] = discretize(plant, h);
  const Matrix gk = g * k;
  return ComplexMatrix(f - lambda.real() * gk, -lambda.imag() * gk);
}

// Ŝ = T⁻¹ S(h, λ) T for the double-integrator design, by closed-form entries:
//   [[1 − hλγk₁/2, 2h/(μ₂−μ₁) − hλγk₂/2], [−hλk₁/2, 1 − hλk₂/2]],
//   γ = (μ₁+μ₂+h)/(μ₂−μ₁).
inline Matrix transformed_entries(double h, double lambda, const synthesis::GainDesign& dsn) {
  const double w = dsn.mu2 - dsn.mu1;
  const double gamma = (dsn.mu1 + dsn.mu2 + h) / w;
  const double hl = h * lambda;
  return Matrix::from_rows({{1.0 - hl * gamma * dsn.k1 / 2.0, 2.0 * h / w - hl * gamma * dsn.k2 / 2.0},
                            {-hl * dsn.k1 / 2.0, 1.0 - hl * dsn.k2 / 2.0}});
}

enum class Verdict { Certified, Refuted, Inconclusive };
enum class Method { ExactInequality, GridSample };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Certified: return "certified";
    case Verdict::Refuted: return "refuted";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

inline std::string_view to_string(Method m) {
  return m == Method::ExactInequality ? "exact-inequality" : "grid-sample";
}

struct GridSpec {
  int h_points = 200;
  int lambda_points = 200;
  double guard = 1e-6;
  unsigned threads = 1;
};

struct SamplePoint {
  double h = 0.0;
  Complex lambda{};
};

struct ContractionCertificate {
  Verdict verdict = Verdict::Inconclusive;
  Method method = Method::GridSample;
  double worst_sigma = 0.0;
  SamplePoint worst_point;
  double margin = 0.0;  // 1 − worst_sigma
  GridSpec grid;
  std::size_t evaluations = 0;
  std::string note;
};

// Real interval [lo, hi] (eigenvalue band) or an explicit set of
// possibly complex eigenvalues (fixed topology).
struct LambdaInterval {
  double lo = 0.0;
  double hi = 0.0;
};
using LambdaSet = std::variant<LambdaInterval, std::vector<Complex>>;

namespace detail {

inline std::vector<Complex> lambda_samples(const LambdaSet& set, int points) {
  if (const auto* iv = std::get_if<LambdaInterval>(&set)) {
    if (!(iv->hi >= iv->lo)) throw DomainError("certify_grid: lambda interval reversed");
    if (iv->hi == iv->lo) return {Complex(iv->lo, 0.0)};
    std::vector<Complex> out;
    for (int i = 0; i < points; ++i)
      out.emplace_back(iv->lo + (iv->hi - iv->lo) * i / (points - 1), 0.0);
    return out;
  }
  const auto& v = std::get<std::vector<Complex>>(set);
  if (v.empty()) throw DomainError("certify_grid: empty lambda set");
  return v;
}

struct RowResult {
  double sigma = -1.0;
  SamplePoint point;
};

}  // namespace detail

// σ̄(T⁻¹S(h, λ)T) over h = hbar·i/h_points (i = 1..h_points) and the λ samples.
// Refuted if any value reaches 1, certified if the maximum is ≤ 1 − guard,
// inconclusive otherwise. A finite grid never proves the ∀-statement; the
// certified verdict here is empirical.
inline ContractionCertificate certify_grid(const PlantModel& plant, const Matrix& k, const Matrix& t, double hbar,
                                           const LambdaSet& lambdas, const GridSpec& grid = {}) {
  require_gain_shape(plant, k);
  if (t.rows() != plant.states() || !t.is_square()) throw ShapeError("certify_grid: T must be n×n");
  if (grid.h_points < 1 || grid.lambda_points < 1) throw DomainError("certify_grid: grid needs at least one point per axis");
  if (!(hbar > 0.0)) throw DomainError("certify_grid: hbar must be > 0");
  const Matrix t_inv = inverse(t);  // throws DomainError when singular
  const auto lam = detail::lambda_samples(lambdas, grid.lambda_points);
  const bool all_real = std::all_of(lam.begin(), lam.end(), [](Complex z) { return z.imag() == 0.0; });
  const std::size_t n = plant.states();

  auto eval_row = [&](int i) {
    detail::RowResult best;
    const double h = hbar * i / grid.h_points;
    const auto [f, g] = discretize(plant, h);
    const Matrix fh = t_inv * f * t;
    const Matrix gh = t_inv * (g * k) * t;
    for (const Complex& z : lam) {
      double s;
      if (all_real && n == 2) {
        const double l = z.real();
        const double p = fh(0, 0) - l * gh(0, 0), q = fh(0, 1) - l * gh(0, 1);
        const double r = fh(1, 0) - l * gh(1, 0), u = fh(1, 1) - l * gh(1, 1);
        const double g11 = p * p + r * r, g22 = q * q + u * u, g12 = p * q + r * u;
        s = std::sqrt(0.5 * (g11 + g22) + std::hypot(0.5 * (g11 - g22), g12));
      } else {
        s = numerics::max_singular_value(ComplexMatrix(fh - z.real() * gh, -z.imag() * gh));
      }
      if (s > best.sigma) best = {s, {h, z}};
    }
    return best;
  };

  std::vector<detail::RowResult> rows(grid.h_points);
  const unsigned workers = std::max(1u, std::min<unsigned>(grid.threads, grid.h_points));
  if (workers == 1) {
    for (int i = 1; i <= grid.h_points; ++i) rows[i - 1] = eval_row(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int i = 1 + static_cast<int>(w); i <= grid.h_points; i += static_cast<int>(workers))
          rows[i - 1] = eval_row(i);
      });
    for (auto& th : pool) th.join();
  }

  ContractionCertificate cert;
  cert.method = Method::GridSample;
  cert.grid = grid;
  cert.evaluations = rows.size() * lam.size();
  detail::RowResult worst;
  for (const auto& r : rows)
    if (r.sigma > worst.sigma) worst = r;  // first maximum in row order
  cert.worst_sigma = worst.sigma;
  cert.worst_point = worst.point;
  cert.margin = 1.0 - worst.sigma;
  if (worst.sigma >= 1.0) {
    cert.verdict = Verdict::Refuted;
    cert.note = "grid point with sigma >= 1";
  } else if (worst.sigma <= 1.0 - grid.guard) {
    cert.verdict = Verdict::Certified;
  } else {
    cert.verdict = Verdict::Inconclusive;
    cert.note = "max sigma within guard margin of 1";
  }
  return cert;
}

// The conditions behind the exact certificate, evaluated individually.
struct ExactConditions {
  bool gain_inequalities = false;  // a > k₁ > 0, b > k₂ > c, d > k₂ − k₁ > 0
  bool s11_positive = false;       // at (hbar, λN)
  bool s22_positive = false;       // at (hbar, λN)
  bool s12_negative = false;       // as h → 0⁺ at λ2
  bool s21_negative = false;       // k₁ > 0
  bool gain_matches_transform = false;  // K·T = [k₁ k₂]
  bool all() const {
    return gain_inequalities && s11_positive && s22_positive && s12_negative && s21_negative &&
           gain_matches_transform;
  }
};

inline ExactConditions exact_conditions(const synthesis::DesignSpec& spec, const synthesis::GainDesign& dsn) {
  ExactConditions c;
  c.gain_inequalities = synthesis::check_gain_inequalities(spec, dsn);
  const Matrix s_top = transformed_entries(spec.hbar, spec.lambdaN, dsn);
  c.s11_positive = s_top(0, 0) > 0.0;
  c.s22_positive = s_top(1, 1) > 0.0;
  // s₁₂/h at h = 0: 2/(μ₂−μ₁) − λγ(0)k₂/2.
  const double w = dsn.mu2 - dsn.mu1;
  c.s12_negative = 2.0 / w - spec.lambda2 * ((dsn.mu1 + dsn.mu2) / w) * dsn.k2 / 2.0 < 0.0;
  c.s21_negative = dsn.k1 > 0.0;
  if (dsn.K.rows() == 1 && dsn.K.cols() == 2 && dsn.T.rows() == 2 && dsn.T.cols() == 2) {
    const Matrix kt = dsn.K * dsn.T;
    const double scale = std::max({std::abs(dsn.k1), std::abs(dsn.k2), 1e-300});
    c.gain_matches_transform =
        std::abs(kt(0, 0) - dsn.k1) <= 1e-12 * scale && std::abs(kt(0, 1) - dsn.k2) <= 1e-12 * scale;
  }
  return c;
}

// Exact certificate for the double integrator over all of
// (0, hbar] × [λ2, λN]: the Gershgorin sums of Ŝ are monotone in (h, λ), so
// checking the limits at the extremal corners covers the whole region. The
// grid (default 50×50) only fills in worst_sigma for reporting; when the
// exact test fails it decides between refuted and inconclusive.
inline ContractionCertificate certify_double_integrator(const synthesis::DesignSpec& spec,
                                                        const synthesis::GainDesign& dsn,
                                                        GridSpec confirm = {50, 50, 1e-6, 1}) {
  spec.validate();
  const auto plant = PlantModel::double_integrator();
  const auto conds = exact_conditions(spec, dsn);
  auto grid = certify_grid(plant, dsn.K, dsn.T, spec.hbar, LambdaInterval{spec.lambda2, spec.lambdaN}, confirm);
  ContractionCertificate cert = grid;
  cert.method = Method::ExactInequality;
  if (conds.all()) {
    cert.verdict = grid.verdict == Verdict::Refuted ? Verdict::Inconclusive : Verdict::Certified;
    cert.note = grid.verdict == Verdict::Refuted ? "exact conditions hold but grid refutes (numerical issue)" : "";
  } else {
    cert.verdict = grid.verdict == Verdict::Refuted ? Verdict::Refuted : Verdict::Inconclusive;
    std::string failed;
    auto add = [&](bool ok, const char* name) {
      if (!ok) failed += failed.empty() ? name : std::string(", ") + name;
    };
    add(conds.gain_inequalities, "gain inequalities");
    add(conds.s11_positive, "s11 > 0");
    add(conds.s22_positive, "s22 > 0");
    add(conds.s12_negative, "s12 < 0");
    add(conds.s21_negative, "s21 < 0");
    add(conds.gain_matches_transform, "K*T = [k1 k2]");
    cert.note = "exact conditions fail: " + failed;
  }
  return cert;
}

// σ̄((I⊗T⁻¹)(I⊗F(h) − L̄⊗G(h)K)(I⊗T)) assembled explicitly.
inline double network_contraction(const PlantModel& plant, const Matrix& k, const Matrix& t, const Matrix& lbar,
                                  double h) {
  require_gain_shape(plant, k);
  if (!lbar.is_square()) throw ShapeError("network_contraction: reduced Laplacian must be square");
  if (t.rows() != plant.states() || !t.is_square()) throw ShapeError("network_contraction: T must be n×n");
  const auto [f, g] = discretize(plant, h);
  const Matrix eye = Matrix::identity(lbar.rows());
  const Matrix phi = kron(eye, f) - kron(lbar, g * k);
  const Matrix phi_hat = kron(eye, inverse(t)) * phi * kron(eye, t);
  return numerics::max_singular_value(phi_hat);
}

struct FixedTopologyLambdas {
  std::vector<Complex> values;  // eigenvalues of L̄ (λ₂ … λ_N)
  bool diagonalizable = true;
  double eigenvector_condition = 1.0;
};

// Eigenvalues of L̄ for a fixed, possibly non-balanced digraph. Uses Eigen's
// general eigensolver; a badly conditioned eigenvector matrix marks L̄ as
// (numerically) non-diagonalizable.
inline FixedTopologyLambdas fixed_topology_lambdas(const graph::WeightedDigraph& g) {
  const Matrix lbar = graph::project_laplacian(graph::laplacian(g), graph::reduction_basis(g.size()));
  const std::size_t n = lbar.rows();
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = lbar(i, j);
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, true);
  if (es.info() != Eigen::Success) throw UnsupportedError("fixed_topology_lambdas: eigensolver failed");
  FixedTopologyLambdas out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.values.push_back(es.eigenvalues()(i));
  std::sort(out.values.begin(), out.values.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  out.eigenvector_condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  out.diagonalizable = out.eigenvector_condition < 1e8;
  return out;
}

}  // namespace sdcons::certify
