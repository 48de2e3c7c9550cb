#pragma once

#include "asymalloc/model.hpp"

namespace asymalloc {

// Long-run moments of log-wealth u(t) = ln U(t) - ln U(0) and the factors X
// under a linear strategy:
//   E u(t)       = K t
//   Var u(t)     ~ varRate t + const
//   E u(t) X(t)  -> P
//   E u X X'     ~ R t + S
struct AsymptoticMoments {
  double K = 0.0;
  double varRate = 0.0;
  Vector P;      // n
  Matrix Delta;  // n x n stationary factor covariance
  Vector Y;      // m+n, stored as a column; enters varRate as Y Y'
  Matrix S;      // n x n
  Matrix R;      // n x n, equal to K * Delta
};

/// Solves B D + D B' + Lambda Lambda' = 0.
Matrix stationary_covariance(const FactorModel& model);

double growth_rate(const FactorModel& model, const Strategy& strategy);

Vector covariance_limit(const FactorModel& model, const Strategy& strategy);

struct VarianceRate {
  double varRate = 0.0;
  Vector Y;
  Matrix S;
};

VarianceRate variance_rate(const FactorModel& model, const Strategy& strategy);

AsymptoticMoments moments(const FactorModel& model, const Strategy& strategy);

// Caches the model-only pieces (Delta and the factorizations of B)
// for repeated evaluation at many strategies. Immutable after construction.
class MomentEngine {
 public:
  explicit MomentEngine(FactorModel model);

  const FactorModel& model() const noexcept { return model_; }
  const Matrix& delta() const noexcept { return delta_; }

  double growthRate(const Strategy& s) const;
  Vector covarianceLimit(const Strategy& s) const;
  VarianceRate varianceRate(const Strategy& s) const;
  AsymptoticMoments moments(const Strategy& s) const;

 private:
  Vector driftSensitivity(const Strategy& s) const;

  FactorModel model_;
  Matrix C_;  // Sigma Sigma'
  Matrix LambdaSigmaT_;
  linalg::LyapunovSolver lyap_;
  Matrix delta_;
  Eigen::PartialPivLU<Matrix> luB_;
  Eigen::PartialPivLU<Matrix> luBt_;
};

/// One asset, one factor. Evaluates the closed-form scalar specialization
/// directly, without any matrix machinery. Requires B < 0.
AsymptoticMoments scalar_moments(const ScalarModelParams& p, double h, double H);

}  // namespace asymalloc
