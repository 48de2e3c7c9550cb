#pragma once

#include "asymalloc/linalg.hpp"

#include <string>

namespace asymalloc {

// Raw, unvalidated model fields as read from a file or produced by calibration.
//
// Units: time is measured in months, asset returns in decimal fractions, and
// factor levels (interest rates) in percentage points.
struct ModelFields {
  Vector a;       // m: drift intercept
  Matrix A;       // m x n: drift loading on the factors
  Matrix B;       // n x n: factor mean reversion
  Matrix Sigma;   // m x (m+n): asset diffusion loadings
  Matrix Lambda;  // n x (m+n): factor diffusion loadings
};

// Continuous-time linear factor model
//   dS/S = (a + A X) dt + Sigma dW,   dX = B X dt + Lambda dW,
// with W an (m+n)-dimensional Brownian motion and X zero-mean.
//
// Instances only exist in a validated state; see validate_model.
class FactorModel {
 public:
  int m() const noexcept { return static_cast<int>(fields_.a.size()); }
  int n() const noexcept { return static_cast<int>(fields_.B.rows()); }

  const Vector& a() const noexcept { return fields_.a; }
  const Matrix& A() const noexcept { return fields_.A; }
  const Matrix& B() const noexcept { return fields_.B; }
  const Matrix& Sigma() const noexcept { return fields_.Sigma; }
  const Matrix& Lambda() const noexcept { return fields_.Lambda; }
  const ModelFields& fields() const noexcept { return fields_; }

  // Sigma * Sigma'
  Matrix assetCovariance() const { return fields_.Sigma * fields_.Sigma.transpose(); }

  friend FactorModel validate_model(ModelFields candidate);

 private:
  explicit FactorModel(ModelFields fields) : fields_(std::move(fields)) {}
  ModelFields fields_;
};

// Linear investment rule I = h + H X (fractions of wealth).
struct Strategy {
  Vector h;  // m
  Matrix H;  // m x n

  static Strategy zero(int m, int n) { return {Vector::Zero(m), Matrix::Zero(m, n)}; }
};

// Risk sensitivity theta and factor sensitivity Gamma (row vector of length n).
struct CriterionParams {
  double theta = 0.0;
  Vector gamma;
};

/// Checks every FactorModel invariant and returns the validated model.
/// Throws ValidationError listing all violations found.
FactorModel validate_model(ModelFields candidate);

/// Throws DimensionError if the strategy does not fit the model.
void check_strategy(const FactorModel& model, const Strategy& strategy);

void check_params(const FactorModel& model, const CriterionParams& params);

// One asset, one factor: Sigma = (sigma, eta), Lambda = (0, lambda).
struct ScalarModelParams {
  double a = 0.0;
  double A = 0.0;
  double B = 0.0;
  double sigma = 0.0;
  double eta = 0.0;
  double lambda = 0.0;
};

FactorModel make_scalar_model(const ScalarModelParams& p);

// The one-asset, one-factor model calibrated to monthly S&P excess returns
// and the 3-month T-bill rate, 1970-2000.
ScalarModelParams sp500_fixture_params();
FactorModel sp500_fixture();

}  // namespace asymalloc
