#include "asymalloc/linalg.hpp"

#include "asymalloc/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>
#include <limits>
#include <string>

namespace asymalloc::linalg {

namespace {

void require_square(const Matrix& M, const char* name) {
  if (M.rows() != M.cols()) {
    throw DimensionError(std::string(name) + " must be square, got " + std::to_string(M.rows()) +
                         "x" + std::to_string(M.cols()));
  }
}

}  // namespace

bool all_finite(const Matrix& M) { return M.allFinite(); }

bool is_symmetric(const Matrix& M, double rtol) {
  if (M.rows() != M.cols()) return false;
  const double scale = std::max(M.norm(), 1e-300);
  return (M - M.transpose()).norm() <= rtol * scale;
}

Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

double min_symmetric_eigenvalue(const Matrix& M) {
  require_square(M, "matrix");
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(M), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("symmetric eigensolver did not converge");
  return es.eigenvalues().minCoeff();
}

StabilityReport check_stability(const Matrix& B) {
  require_square(B, "B");
  if (!B.allFinite()) throw NumericError("B has non-finite entries");
  StabilityReport report;
  if (B.size() == 0) {
    report.isStable = true;
    report.margin = -std::numeric_limits<double>::infinity();
    return report;
  }
  Eigen::EigenSolver<Matrix> es(B, false);
  if (es.info() != Eigen::Success) throw NumericError("eigensolver did not converge on B");
  const auto& ev = es.eigenvalues();
  report.eigenvalueRealParts.reserve(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) report.eigenvalueRealParts.push_back(ev[i].real());
  report.margin = *std::max_element(report.eigenvalueRealParts.begin(),
                                    report.eigenvalueRealParts.end());
  report.isStable = report.margin < kStabilityMargin;
  return report;
}

LyapunovSolver::LyapunovSolver(const Matrix& B) {
  require_square(B, "B");
  const auto stability = check_stability(B);
  if (!stability.isStable) {
    throw PreconditionError("solve_lyapunov: B is not stable (max real eigenvalue part " +
                            std::to_string(stability.margin) + ")");
  }
  if (B.size() == 0) return;
  // B = U T U*, T upper triangular.
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(B.cast<std::complex<double>>());
  if (schur.info() != Eigen::Success) throw NumericError("solve_lyapunov: Schur decomposition failed");
  U_ = schur.matrixU();
  T_ = schur.matrixT();
}

Matrix LyapunovSolver::solve(const Matrix& Q) const {
  require_square(Q, "Q");
  const Eigen::Index n = T_.rows();
  if (Q.rows() != n) {
    throw DimensionError("solve_lyapunov: B is " + std::to_string(n) + "x" + std::to_string(n) +
                         " but Q is " + std::to_string(Q.rows()) + "x" + std::to_string(Q.cols()));
  }
  if (!Q.allFinite()) throw NumericError("solve_lyapunov: Q has non-finite entries");
  if (n == 0) return Matrix(0, 0);

  // In Schur coordinates the equation is T X + X T* = U* Q U. Column j couples
  // only to columns k > j of X because (T*)_{kj} = conj(T_{jk}).
  const Eigen::MatrixXcd F = U_.adjoint() * Q.cast<std::complex<double>>() * U_;
  Eigen::MatrixXcd X = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd rhs = F.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) rhs -= std::conj(T_(j, k)) * X.col(k);
    const std::complex<double> shift = std::conj(T_(j, j));
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      std::complex<double> acc = rhs(i);
      for (Eigen::Index k = i + 1; k < n; ++k) acc -= T_(i, k) * X(k, j);
      X(i, j) = acc / (T_(i, i) + shift);
    }
  }
  Matrix S = (U_ * X * U_.adjoint()).real();
  if (!S.allFinite()) throw NumericError("solve_lyapunov: solution is not finite");
  if (is_symmetric(Q)) S = symmetrize(S);
  return S;
}

Matrix solve_lyapunov(const Matrix& B, const Matrix& Q) {
  require_square(Q, "Q");
  if (B.rows() != Q.rows() || B.cols() != Q.cols()) {
    throw DimensionError("solve_lyapunov: B is " + std::to_string(B.rows()) + "x" +
                         std::to_string(B.cols()) + " but Q is " + std::to_string(Q.rows()) + "x" +
                         std::to_string(Q.cols()));
  }
  return LyapunovSolver(B).solve(Q);
}

Matrix solve_lyapunov_const(const Matrix& B, const Matrix& C) { return solve_lyapunov(B, -C); }

double lyapunov_residual(const Matrix& B, const Matrix& S, const Matrix& Q) {
  const double scale = B.norm() * S.norm() + Q.norm();
  const double r = (B * S + S * B.transpose() - Q).norm();
  return scale > 0.0 ? r / scale : r;
}

}  // namespace asymalloc::linalg
