#pragma once

// Small dense linear algebra: matrix exponential and its integral, singular
// value routines and the Gershgorin-type bounds on the largest singular value.
//
// Accuracy envelope: expm and expm_integral are accurate to ~1e-12 relative for
// ‖A h‖ ≤ 10. Larger arguments are handled by extra squarings but lose digits
// roughly in proportion to the number of squarings.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "sdcons/errors.hpp"
#include "sdcons/matrix.hpp"

namespace sdcons::numerics {

namespace detail {

// Taylor series of e^X for ‖X‖ ≤ 1/2. Terminates early once terms vanish, so
// nilpotent inputs produce the exact finite sum.
inline Matrix taylor_exp(const Matrix& x) {
  const std::size_t n = x.rows();
  Matrix result = Matrix::identity(n);
  Matrix term = Matrix::identity(n);
  for (int k = 1; k <= 30; ++k) {
    term = term * x;
    term *= 1.0 / k;
    const double tn = inf_norm(term);
    if (tn == 0.0) break;
    result += term;
    if (tn <= 1e-18 * inf_norm(result)) break;
  }
  return result;
}

}  // namespace detail

// e^{A h} by scaling and squaring. Scaling uses powers of two so that the
// scaled argument is exact.
inline Matrix expm(const Matrix& a, double h = 1.0) {
  if (!a.is_square()) throw ShapeError("expm: matrix not square");
  if (!std::isfinite(h) || h < 0.0) throw DomainError("expm: h must be finite and >= 0");
  Matrix x = a * h;
  const double norm = inf_norm(x);
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  x *= std::ldexp(1.0, -squarings);
  Matrix e = detail::taylor_exp(x);
  for (int i = 0; i < squarings; ++i) e = e * e;
  return e;
}

// (∫₀ʰ e^{Aτ} dτ) B as the top-right block of exp([[A, B], [0, 0]] h).
inline Matrix expm_integral(const Matrix& a, const Matrix& b, double h) {
  if (!a.is_square()) throw ShapeError("expm_integral: A not square");
  if (b.rows() != a.rows()) throw ShapeError("expm_integral: B row count must equal dim A");
  const std::size_t n = a.rows();
  const std::size_t m = b.cols();
  Matrix aug(n + m, n + m);
  aug.set_block(0, 0, a);
  aug.set_block(0, n, b);
  return expm(aug, h).block(0, n, n, m);
}

// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, ascending.
inline std::vector<double> symmetric_eigenvalues(const Matrix& s) {
  if (!s.is_square()) throw ShapeError("symmetric_eigenvalues: matrix not square");
  const std::size_t n = s.rows();
  Matrix a = s;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += a(i, i) * a(i, i);
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    }
    if (off <= 1e-32 * std::max(diag, 1e-300) || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

// Eigenvalues of a Hermitian matrix H = re + j·im, ascending. Each pivot is
// first phase-rotated to a real off-diagonal, then eliminated by a real
// Jacobi rotation.
inline std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h) {
  if (!h.is_square()) throw ShapeError("hermitian_eigenvalues: matrix not square");
  const std::size_t n = h.rows();
  std::vector<Complex> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = h(i, j);
  auto at = [&](std::size_t i, std::size_t j) -> Complex& { return a[i * n + j]; };

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += std::norm(at(i, i));
      for (std::size_t j = i + 1; j < n; ++j) off += std::norm(at(i, j));
    }
    if (off <= 1e-32 * std::max(diag, 1e-300) || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double r = std::abs(at(p, q));
        if (r == 0.0) continue;
        // Column q times e^{-jφ}, row q times e^{jφ}: makes a_pq = r real.
        const Complex phase = std::conj(at(p, q)) / r;
        for (std::size_t k = 0; k < n; ++k) at(k, q) *= phase;
        for (std::size_t k = 0; k < n; ++k) at(q, k) *= std::conj(phase);
        at(p, q) = r;
        at(q, p) = r;
        at(q, q) = at(q, q).real();

        const double theta = (at(q, q).real() - at(p, p).real()) / (2.0 * r);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = at(k, p);
          const Complex akq = at(k, q);
          at(k, p) = c * akp - sn * akq;
          at(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = at(p, k);
          const Complex aqk = at(q, k);
          at(p, k) = c * apk - sn * aqk;
          at(q, k) = sn * apk + c * aqk;
        }
        at(p, q) = 0.0;
        at(q, p) = 0.0;
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = at(i, i).real();
  std::sort(ev.begin(), ev.end());
  return ev;
}

namespace detail {

// Largest eigenvalue of the 2×2 Hermitian [[g11, g12], [conj(g12), g22]].
inline double hermitian2_max_eigenvalue(double g11, double g22, Complex g12) {
  return 0.5 * (g11 + g22) + std::hypot(0.5 * (g11 - g22), std::abs(g12));
}

// Gram matrix AᴴA (or AAᴴ when that one is smaller).
inline ComplexMatrix gram(const ComplexMatrix& a) {
  const bool tall = a.rows() >= a.cols();
  const std::size_t k = tall ? a.cols() : a.rows();
  const std::size_t inner = tall ? a.rows() : a.cols();
  ComplexMatrix g(Matrix(k, k), Matrix(k, k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      Complex s = 0.0;
      for (std::size_t r = 0; r < inner; ++r)
        s += tall ? std::conj(a(r, i)) * a(r, j) : a(i, r) * std::conj(a(j, r));
      g.set(i, j, s);
      g.set(j, i, std::conj(s));
    }
  return g;
}

inline Matrix gram(const Matrix& a) {
  return a.rows() >= a.cols() ? a.transpose() * a : a * a.transpose();
}

}  // namespace detail

// All singular values, descending.
inline std::vector<double> singular_values(const Matrix& a) {
  auto ev = symmetric_eigenvalues(detail::gram(a));
  std::vector<double> sv;
  for (auto it = ev.rbegin(); it != ev.rend(); ++it) sv.push_back(std::sqrt(std::max(*it, 0.0)));
  return sv;
}

inline std::vector<double> singular_values(const ComplexMatrix& a) {
  auto ev = hermitian_eigenvalues(detail::gram(a));
  std::vector<double> sv;
  for (auto it = ev.rbegin(); it != ev.rend(); ++it) sv.push_back(std::sqrt(std::max(*it, 0.0)));
  return sv;
}

inline double max_singular_value(const Matrix& a) {
  if (a.rows() == 2 && a.cols() == 2) {
    const double p = a(0, 0), q = a(0, 1), r = a(1, 0), s = a(1, 1);
    const double g11 = p * p + r * r;
    const double g22 = q * q + s * s;
    const double g12 = p * q + r * s;
    return std::sqrt(detail::hermitian2_max_eigenvalue(g11, g22, g12));
  }
  return singular_values(a).front();
}

inline double max_singular_value(const ComplexMatrix& a) {
  if (a.rows() == 2 && a.cols() == 2) {
    const Complex p = a(0, 0), q = a(0, 1), r = a(1, 0), s = a(1, 1);
    const double g11 = std::norm(p) + std::norm(r);
    const double g22 = std::norm(q) + std::norm(s);
    const Complex g12 = std::conj(p) * q + std::conj(r) * s;
    return std::sqrt(detail::hermitian2_max_eigenvalue(g11, g22, g12));
  }
  return singular_values(a).front();
}

// max_i max(row-i absolute sum, column-i absolute sum) ≥ σ̄(A).
inline double gershgorin_sv_bound(const ComplexMatrix& a) {
  if (!a.is_square()) throw ShapeError("gershgorin_sv_bound: matrix not square");
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double r = 0.0, c = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      r += std::abs(a(i, j));
      c += std::abs(a(j, i));
    }
    best = std::max({best, r, c});
  }
  return best;
}

inline double gershgorin_sv_bound(const Matrix& a) {
  if (!a.is_square()) throw ShapeError("gershgorin_sv_bound: matrix not square");
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double r = 0.0, c = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      r += std::abs(a(i, j));
      c += std::abs(a(j, i));
    }
    best = std::max({best, r, c});
  }
  return best;
}

using BlockGrid = std::vector<std::vector<Matrix>>;

// Block version: row and column sums of per-block σ̄.
inline double block_gershgorin_sv_bound(const BlockGrid& blocks) {
  const std::size_t nb = blocks.size();
  if (nb == 0) throw ShapeError("block_gershgorin_sv_bound: empty grid");
  const std::size_t bn = blocks[0].empty() ? 0 : blocks[0][0].rows();
  std::vector<double> sv(nb * nb);
  for (std::size_t i = 0; i < nb; ++i) {
    if (blocks[i].size() != nb) throw ShapeError("block_gershgorin_sv_bound: ragged grid");
    for (std::size_t j = 0; j < nb; ++j) {
      const Matrix& b = blocks[i][j];
      if (b.rows() != bn || b.cols() != bn)
        throw ShapeError("block_gershgorin_sv_bound: blocks must be equal-size square");
      sv[i * nb + j] = max_singular_value(b);
    }
  }
  double best = 0.0;
  for (std::size_t i = 0; i < nb; ++i) {
    double r = 0.0, c = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      r += sv[i * nb + j];
      c += sv[j * nb + i];
    }
    best = std::max({best, r, c});
  }
  return best;
}

// (A − jB, A + jB). The singular values of the real embedding [[A, −B], [B, A]]
// are the union of the singular values of these two.
inline std::pair<ComplexMatrix, ComplexMatrix> complex_block_split(const Matrix& a, const Matrix& b) {
  if (!a.is_square() || a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("complex_block_split: A and B must be square and equal-shape");
  return {ComplexMatrix(a, -1.0 * b), ComplexMatrix(a, b)};
}

}  // namespace sdcons::numerics
