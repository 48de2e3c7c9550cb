#pragma once

#include <Eigen/Dense>

#include <vector>

namespace asymalloc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

// A matrix whose spectral abscissa is at or above this value is treated as
// unstable. Lyapunov solves and B^{-1} degrade badly near the boundary.
inline constexpr double kStabilityMargin = -1e-12;

struct StabilityReport {
  std::vector<double> eigenvalueRealParts;
  bool isStable = false;
  double margin = 0.0;  // largest real part
};

StabilityReport check_stability(const Matrix& B);

/// Solves B*S + S*B' = Q for S by the complex-Schur (Bartels-Stewart) method.
/// B must be stable. When Q is symmetric the result is symmetrized.
Matrix solve_lyapunov(const Matrix& B, const Matrix& Q);

// Factorizes B once for repeated Lyapunov solves with the same B.
class LyapunovSolver {
 public:
  explicit LyapunovSolver(const Matrix& B);

  Eigen::Index size() const noexcept { return T_.rows(); }
  Matrix solve(const Matrix& Q) const;

 private:
  Eigen::MatrixXcd U_;
  Eigen::MatrixXcd T_;
};

/// Solves B*D + D*B' + C = 0, i.e. solve_lyapunov(B, -C).
Matrix solve_lyapunov_const(const Matrix& B, const Matrix& C);

bool all_finite(const Matrix& M);
bool is_symmetric(const Matrix& M, double rtol = 1e-13);
Matrix symmetrize(const Matrix& M);

// Smallest eigenvalue of the symmetric part of M.
double min_symmetric_eigenvalue(const Matrix& M);

// Relative Frobenius residual of B*S + S*B' - Q, scaled by |B||S| + |Q|.
double lyapunov_residual(const Matrix& B, const Matrix& S, const Matrix& Q);

}  // namespace linalg
}  // namespace asymalloc
