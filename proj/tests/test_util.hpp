#pragma once

#include "asymalloc/linalg.hpp"
#include "asymalloc/model.hpp"

#include <Eigen/Dense>

#include <random>

namespace asymalloc::testing {

// Lyapunov oracle by vectorization: (I (x) B + B (x) I) vec(S) = vec(Q).
inline Matrix kronecker_lyapunov(const Matrix& B, const Matrix& Q) {
  const Eigen::Index n = B.rows();
  const Matrix I = Matrix::Identity(n, n);
  Matrix K = Matrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n) += I(i, j) * B;
      K.block(i * n, j * n, n, n) += B(i, j) * I;
    }
  }
  const Vector q = Eigen::Map<const Vector>(Q.data(), n * n);
  const Vector s = K.fullPivLu().solve(q);
  return Eigen::Map<const Matrix>(s.data(), n, n);
}

// Stable B = -(c I + G G') + (skew part), always with eigenvalues in the left half plane.
inline Matrix random_stable(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Matrix G(n, n), W(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      G(i, j) = 0.5 * z(rng);
      W(i, j) = z(rng);
    }
  }
  return -(u(rng) * Matrix::Identity(n, n) + G * G.transpose()) + 0.5 * (W - W.transpose());
}

inline Matrix random_matrix(std::mt19937_64& rng, int r, int c, double scale = 1.0) {
  std::normal_distribution<double> z(0.0, scale);
  Matrix M(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) M(i, j) = z(rng);
  }
  return M;
}

inline FactorModel random_model(std::mt19937_64& rng, int m, int n) {
  ModelFields f;
  f.a = random_matrix(rng, m, 1, 0.02);
  f.A = random_matrix(rng, m, n, 0.02);
  f.B = random_stable(rng, n);
  f.Sigma = random_matrix(rng, m, m + n, 0.05);
  f.Lambda = random_matrix(rng, n, m + n, 0.5);
  return validate_model(std::move(f));
}

inline Strategy random_strategy(std::mt19937_64& rng, int m, int n) {
  return {random_matrix(rng, m, 1), random_matrix(rng, m, n)};
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace asymalloc::testing
