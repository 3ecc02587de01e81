#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "sdcons/errors.hpp"
#include "sdcons/numerics.hpp"

using namespace sdcons;
using namespace sdcons::numerics;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.data()) v = nd(rng);
  return m;
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

double svd_oracle(const Matrix& m) { return Eigen::JacobiSVD<Eigen::MatrixXd>(to_eigen(m)).singularValues()(0); }

// Power iteration on AᵀA.
double power_iteration_sigma(const Matrix& a) {
  const Matrix g = a.transpose() * a;
  std::vector<double> v(g.cols(), 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 5000; ++it) {
    auto w = g * std::span<const double>(v);
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / norm;
    lambda = norm;
  }
  return std::sqrt(lambda);
}

Matrix random_orthogonal(std::mt19937_64& rng, std::size_t n) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(to_eigen(random_matrix(rng, n, n)));
  const Eigen::MatrixXd q = qr.householderQ();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = q(i, j);
  return out;
}

}  // namespace

TEST(Expm, NilpotentIsExact) {
  const Matrix a = Matrix::from_rows({{0, 1}, {0, 0}});
  EXPECT_EQ(expm(a, 2.0), Matrix::from_rows({{1, 2}, {0, 1}}));
}

TEST(Expm, ZeroGivesIdentity) { EXPECT_EQ(expm(Matrix(2, 2), 5.0), Matrix::identity(2)); }

TEST(Expm, DiagonalMatchesScalarExp) {
  const double e1 = 0.3678794411714423215955238;
  const Matrix got = expm(Matrix::from_rows({{-1, 0}, {0, -1}}), 1.0);
  EXPECT_NEAR(got(0, 0), e1, 1e-15);
  EXPECT_NEAR(got(1, 1), e1, 1e-15);
  EXPECT_EQ(got(0, 1), 0.0);
}

TEST(Expm, DampedOscillatorAgainstHighPrecision) {
  // mpmath.expm([[0,1],[-2,-3]] * 0.7)
  const Matrix got = expm(Matrix::from_rows({{0, 1}, {-2, -3}}), 0.7);
  const double want[2][2] = {{0.74657364364121255247, 0.24998833984980303776},
                             {-0.49997667969960607553, -0.0033913759081965608251}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(got(i, j), want[i][j], 1e-14);
}

TEST(Expm, LargeNormRelativeAccuracy) {
  // ‖Ah‖ = 10 on a diagonal matrix: relative error per entry.
  const Matrix got = expm(Matrix::from_rows({{-10, 0}, {0, 10}}), 1.0);
  EXPECT_NEAR(got(0, 0) / std::exp(-10.0), 1.0, 1e-12);
  EXPECT_NEAR(got(1, 1) / std::exp(10.0), 1.0, 1e-12);
}

TEST(Expm, RejectsBadInput) {
  EXPECT_THROW(expm(Matrix(2, 3)), ShapeError);
  EXPECT_THROW(expm(Matrix(2, 2), -1.0), DomainError);
  EXPECT_THROW(expm(Matrix(2, 2), std::nan("")), DomainError);
}

TEST(Expm, SemigroupProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const Matrix a = random_matrix(rng, n, n);
    const double total = 5.0 / inf_norm(a);
    const double h1 = total * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const Matrix lhs = expm(a, total);
    EXPECT_LE(max_abs_diff(lhs, expm(a, h1) * expm(a, total - h1)) / std::max(1.0, inf_norm(lhs)), 1e-10);
  }
}

TEST(ExpmIntegral, DoubleIntegratorClosedForm) {
  const Matrix a = Matrix::from_rows({{0, 1}, {0, 0}});
  const Matrix b = Matrix::from_rows({{0}, {1}});
  for (double h : {0.0, 0.25, 1.0, 3.0, 7.5}) {
    const Matrix g = expm_integral(a, b, h);
    EXPECT_NEAR(g(0, 0), h * h / 2.0, 1e-14 * std::max(1.0, h * h / 2.0));
    EXPECT_NEAR(g(1, 0), h, 1e-14 * std::max(1.0, h));
  }
}

TEST(ExpmIntegral, ZeroDriftIsLinearInH) {
  EXPECT_LE(max_abs_diff(expm_integral(Matrix(2, 2), Matrix::identity(2), 3.0), 3.0 * Matrix::identity(2)), 1e-15);
}

TEST(ExpmIntegral, ScalarQuadrature) {
  // ∫₀¹ e^{-t} dt = 1 − e⁻¹
  const Matrix g = expm_integral(Matrix::from_rows({{-1}}), Matrix::from_rows({{1}}), 1.0);
  EXPECT_NEAR(g(0, 0), 0.6321205588285576784044762, 1e-15);
}

TEST(ExpmIntegral, InvertibleMatchesResolventFormula) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = random_matrix(rng, 3, 3);
    const Matrix b = random_matrix(rng, 3, 2);
    const double h = 0.7;
    const Matrix want = inverse(a) * (expm(a, h) - Matrix::identity(3)) * b;
    EXPECT_LE(max_abs_diff(expm_integral(a, b, h), want) / std::max(1.0, inf_norm(want)), 1e-9);
  }
}

TEST(ExpmIntegral, ShapeErrors) {
  EXPECT_THROW(expm_integral(Matrix(2, 3), Matrix(2, 1), 1.0), ShapeError);
  EXPECT_THROW(expm_integral(Matrix(2, 2), Matrix(3, 1), 1.0), ShapeError);
}

TEST(SymmetricEigen, KnownSpectrum) {
  const auto ev = symmetric_eigenvalues(Matrix::from_rows({{2, -1, -1}, {-1, 2, -1}, {-1, -1, 2}}));
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_NEAR(ev[0], 0.0, 1e-14);
  EXPECT_NEAR(ev[1], 3.0, 1e-14);
  EXPECT_NEAR(ev[2], 3.0, 1e-14);
}

TEST(HermitianEigen, MatchesEigen) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const Matrix x = random_matrix(rng, n, n), y = random_matrix(rng, n, n);
    // H = X + Xᵀ + j(Y − Yᵀ) is Hermitian.
    const ComplexMatrix h(x + x.transpose(), y - y.transpose());
    Eigen::MatrixXcd e(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) e(i, j) = h(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(e);
    const auto got = hermitian_eigenvalues(h);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(got[i], es.eigenvalues()(i), 1e-10);
  }
}

TEST(MaxSingularValue, TrivialCases) {
  EXPECT_NEAR(max_singular_value(Matrix::identity(3)), 1.0, 1e-15);
  EXPECT_NEAR(max_singular_value(Matrix::from_rows({{0, 2}, {0, 0}})), 2.0, 1e-15);
  EXPECT_NEAR(max_singular_value(Matrix::from_rows({{3, 4}})), 5.0, 1e-15);
  EXPECT_NEAR(max_singular_value(ComplexMatrix(Matrix(2, 2), Matrix::identity(2))), 1.0, 1e-15);
}

TEST(MaxSingularValue, MatchesPowerIteration) {
  std::mt19937_64 rng(4);
  const Matrix a = random_matrix(rng, 4, 4);
  EXPECT_NEAR(max_singular_value(a), power_iteration_sigma(a), 1e-8);
}

TEST(MaxSingularValue, MatchesSvdOracle) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t r = 1 + trial % 7, c = 1 + (trial / 7) % 7;
    const Matrix a = random_matrix(rng, r, c);
    const double want = svd_oracle(a);
    EXPECT_NEAR(max_singular_value(a), want, 1e-10 * want);
  }
}

TEST(MaxSingularValue, ComplexMatchesRealEmbedding) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 5;
    const Matrix a = random_matrix(rng, n, n), b = random_matrix(rng, n, n);
    Matrix emb(2 * n, 2 * n);
    emb.set_block(0, 0, a);
    emb.set_block(0, n, -1.0 * b);
    emb.set_block(n, 0, b);
    emb.set_block(n, n, a);
    const auto [minus, plus] = complex_block_split(a, b);
    const double want = svd_oracle(emb);
    EXPECT_NEAR(std::max(max_singular_value(minus), max_singular_value(plus)), want, 1e-10 * want);
  }
}

TEST(MaxSingularValue, OrthogonalInvariance) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const Matrix a = random_matrix(rng, n, n);
    const Matrix u = random_orthogonal(rng, n), v = random_orthogonal(rng, n);
    EXPECT_NEAR(max_singular_value(u * a * v), max_singular_value(a), 1e-10 * max_singular_value(a));
  }
}

TEST(Gershgorin, Examples) {
  EXPECT_EQ(gershgorin_sv_bound(Matrix::identity(3)), 1.0);
  EXPECT_EQ(gershgorin_sv_bound(Matrix::from_rows({{1, -1}, {0, 1}})), 2.0);
  EXPECT_THROW(gershgorin_sv_bound(Matrix(2, 3)), ShapeError);
  // Column sums count: column 0 of [[1,0],[3,0]] sums to 4.
  EXPECT_EQ(gershgorin_sv_bound(Matrix::from_rows({{1, 0}, {3, 0}})), 4.0);
  EXPECT_EQ(gershgorin_sv_bound(ComplexMatrix(Matrix::from_rows({{3}}), Matrix::from_rows({{4}}))), 5.0);
}

TEST(Gershgorin, DominatesSigma) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const Matrix a = random_matrix(rng, n, n);
    EXPECT_GE(gershgorin_sv_bound(a), svd_oracle(a) * (1.0 - 1e-12));
    const ComplexMatrix c(a, random_matrix(rng, n, n));
    EXPECT_GE(gershgorin_sv_bound(c), max_singular_value(c) * (1.0 - 1e-12));
  }
}

TEST(BlockGershgorin, Examples) {
  const BlockGrid ones{{Matrix::identity(2), Matrix::identity(2)}, {Matrix::identity(2), Matrix::identity(2)}};
  EXPECT_NEAR(block_gershgorin_sv_bound(ones), 2.0, 1e-15);
  const Matrix m = Matrix::from_rows({{1, 2}, {0, 1}});
  const BlockGrid diag{{m, Matrix(2, 2)}, {Matrix(2, 2), m}};
  EXPECT_NEAR(block_gershgorin_sv_bound(diag), max_singular_value(m), 1e-15);
}

TEST(BlockGershgorin, RaggedGridThrows) {
  EXPECT_THROW(block_gershgorin_sv_bound(BlockGrid{}), ShapeError);
  EXPECT_THROW(block_gershgorin_sv_bound(BlockGrid{{Matrix::identity(2), Matrix::identity(2)}, {Matrix::identity(2)}}),
               ShapeError);
  EXPECT_THROW(block_gershgorin_sv_bound(BlockGrid{{Matrix::identity(2), Matrix::identity(3)},
                                                   {Matrix::identity(2), Matrix::identity(2)}}),
               ShapeError);
  EXPECT_THROW(block_gershgorin_sv_bound(BlockGrid{{Matrix(2, 3)}}), ShapeError);
}

TEST(BlockGershgorin, DominatesAssembledSigma) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 200; ++trial) {
    BlockGrid grid(3, std::vector<Matrix>(3));
    Matrix assembled(6, 6);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        grid[i][j] = random_matrix(rng, 2, 2);
        assembled.set_block(2 * i, 2 * j, grid[i][j]);
      }
    EXPECT_GE(block_gershgorin_sv_bound(grid), svd_oracle(assembled) * (1.0 - 1e-12));
  }
}

TEST(ComplexBlockSplit, Cases) {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  auto [m0, p0] = complex_block_split(a, Matrix(2, 2));
  EXPECT_EQ(m0.real(), a);
  EXPECT_EQ(p0.real(), a);
  EXPECT_NEAR(max_singular_value(m0), max_singular_value(a), 1e-14);
  auto [m1, p1] = complex_block_split(Matrix(2, 2), Matrix::identity(2));
  EXPECT_NEAR(std::max(max_singular_value(m1), max_singular_value(p1)), 1.0, 1e-15);
  EXPECT_THROW(complex_block_split(a, Matrix(3, 3)), ShapeError);
  EXPECT_THROW(complex_block_split(Matrix(2, 3), Matrix(2, 3)), ShapeError);
}

TEST(ComplexBlockSplit, SingularValueMultisetsAgree) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3;
    const Matrix a = random_matrix(rng, n, n), b = random_matrix(rng, n, n);
    Matrix emb(2 * n, 2 * n);
    emb.set_block(0, 0, a);
    emb.set_block(0, n, -1.0 * b);
    emb.set_block(n, 0, b);
    emb.set_block(n, n, a);
    const Eigen::VectorXd want = Eigen::JacobiSVD<Eigen::MatrixXd>(to_eigen(emb)).singularValues();
    const auto [minus, plus] = complex_block_split(a, b);
    auto got = singular_values(minus);
    const auto more = singular_values(plus);
    got.insert(got.end(), more.begin(), more.end());
    std::sort(got.rbegin(), got.rend());
    for (std::size_t i = 0; i < 2 * n; ++i) EXPECT_NEAR(got[i], want(i), 1e-9);
  }
}
