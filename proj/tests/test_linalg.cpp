#include "asymalloc/errors.hpp"
#include "asymalloc/linalg.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace asymalloc;
using namespace asymalloc::linalg;
using asymalloc::testing::kronecker_lyapunov;
using asymalloc::testing::random_matrix;
using asymalloc::testing::random_stable;

TEST(Lyapunov, ScalarClosedForm) {
  Matrix B(1, 1), C(1, 1);
  B << -0.021;
  C << 0.6329 * 0.6329;
  const Matrix D = solve_lyapunov_const(B, C);
  EXPECT_NEAR(D(0, 0), 0.6329 * 0.6329 / 0.042, 1e-12);
}

TEST(Lyapunov, DiagonalClosedForm) {
  // Entry (i,j) of the solution is Q_ij / (b_i + b_j).
  Matrix B = Vector(Eigen::Vector3d(-1.0, -0.5, -0.1)).asDiagonal();
  Matrix Q(3, 3);
  Q << 1, 2, 3, 2, 5, 6, 3, 6, 9;
  const Matrix S = solve_lyapunov(B, Q);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(S(i, j), Q(i, j) / (B(i, i) + B(j, j)), 1e-13);
  }
}

TEST(Lyapunov, MatchesKroneckerOracleOnRandomStable) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 4;
    const Matrix B = random_stable(rng, n);
    const Matrix L = random_matrix(rng, n, n + 1);
    const Matrix Q = L * L.transpose();
    const Matrix D = solve_lyapunov_const(B, Q);
    const Matrix Dk = kronecker_lyapunov(B, -Q);
    EXPECT_LE((D - Dk).norm(), 1e-8 * Dk.norm()) << "n=" << n;
    EXPECT_LE(lyapunov_residual(B, D, -Q), 1e-12);
    EXPECT_TRUE(is_symmetric(D));
    EXPECT_GE(min_symmetric_eigenvalue(D), -1e-12 * D.norm());
  }
}

TEST(Lyapunov, NonSymmetricRightHandSide) {
  std::mt19937_64 rng(11);
  const Matrix B = random_stable(rng, 3);
  const Matrix Q = random_matrix(rng, 3, 3);
  const Matrix S = solve_lyapunov(B, Q);
  EXPECT_LE((S - kronecker_lyapunov(B, Q)).norm(), 1e-10 * S.norm());
  EXPECT_LE(lyapunov_residual(B, S, Q), 1e-12);
}

TEST(Lyapunov, ComplexEigenvalues) {
  Matrix B(2, 2);
  B << -0.1, 2.0, -2.0, -0.1;
  const Matrix Q = Matrix::Identity(2, 2);
  const Matrix S = solve_lyapunov(B, Q);
  EXPECT_LE((S - kronecker_lyapunov(B, Q)).norm(), 1e-12);
}

TEST(Lyapunov, CachedSolverReusable) {
  std::mt19937_64 rng(3);
  const Matrix B = random_stable(rng, 4);
  const LyapunovSolver solver(B);
  for (int k = 0; k < 3; ++k) {
    const Matrix Q = random_matrix(rng, 4, 4);
    EXPECT_LE((solver.solve(Q) - solve_lyapunov(B, Q)).norm(), 1e-14 * (1 + Q.norm()));
  }
}

TEST(Lyapunov, RejectsUnstable) {
  Matrix B(2, 2);
  B << -1.0, 0.0, 0.0, 0.0;
  EXPECT_THROW(solve_lyapunov(B, Matrix::Identity(2, 2)), PreconditionError);
  B(1, 1) = 0.3;
  EXPECT_THROW(solve_lyapunov(B, Matrix::Identity(2, 2)), PreconditionError);
}

TEST(Lyapunov, RejectsShapeMismatch) {
  EXPECT_THROW(solve_lyapunov(-Matrix::Identity(2, 2), Matrix::Identity(3, 3)), DimensionError);
  EXPECT_THROW(solve_lyapunov(Matrix::Ones(2, 3), Matrix::Identity(2, 2)), DimensionError);
}

TEST(Stability, ReportsSpectralAbscissa) {
  Matrix B(2, 2);
  B << -0.5, 1.0, 0.0, -0.2;
  const auto r = check_stability(B);
  EXPECT_TRUE(r.isStable);
  EXPECT_NEAR(r.margin, -0.2, 1e-14);
  EXPECT_EQ(r.eigenvalueRealParts.size(), 2u);
  B(1, 1) = 0.0;
  EXPECT_FALSE(check_stability(B).isStable);
}

TEST(Helpers, SymmetryAndFiniteness) {
  Matrix M(2, 2);
  M << 1, 2, 3, 4;
  EXPECT_FALSE(is_symmetric(M));
  EXPECT_TRUE(is_symmetric(symmetrize(M)));
  EXPECT_DOUBLE_EQ(symmetrize(M)(0, 1), 2.5);
  EXPECT_TRUE(all_finite(M));
  M(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(all_finite(M));
}
