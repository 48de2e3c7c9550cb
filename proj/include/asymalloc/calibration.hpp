#pragma once

#include "asymalloc/io.hpp"
#include "asymalloc/model.hpp"
#include "asymalloc/timeseries.hpp"

namespace asymalloc::calibration {

// Units of the raw data. The model itself always uses decimal returns and
// percentage-point factors.
struct UnitConventions {
  bool returnsInPercent = false;
  bool factorsInPercent = true;
};

// Discrete-time monthly regressions on de-meaned factors x:
//   r_t = c_r + L x_{t-1} + e_t        (one equation per asset)
//   x_t = c_x + Phi x_{t-1} + v_t      (one equation per factor)
struct DiscreteEstimates {
  Matrix returnCoefficients;   // m x (1+n): [constant | loadings]
  Matrix returnTRatios;        // m x (1+n)
  Matrix factorCoefficients;   // n x (1+n): [constant | persistence]
  Matrix factorTRatios;        // n x (1+n)
  Matrix innovationCovariance; // (m+n) x (m+n), returns first, then factors
  Vector factorMeans;          // removed before fitting
  long observations = 0;
  UnitConventions units;

  int m() const { return static_cast<int>(returnCoefficients.rows()); }
  int n() const { return static_cast<int>(factorCoefficients.rows()); }
};

/// OLS of each return on a constant and the lagged de-meaned factors, and a
/// VAR(1) with constant for the factors. Throws DataError naming collinear
/// regressors when the design matrix is rank deficient.
DiscreteEstimates estimate_discrete(const TimeSeriesData& data, const UnitConventions& units = {});

struct ContinuousOptions {
  // B = log(Phi) instead of Phi - I.
  bool logPersistence = false;
  // Mean reversion weaker than this (per month) is rejected as a near unit root.
  double minMeanReversion = 1e-4;
};

/// Maps discrete estimates to a FactorModel:
///   a = constant, A = loadings (converted to decimal per percentage point),
///   B = Phi - I, Lambda = [0 | chol(V_xx)], Sigma = [chol(V_rr - S_f S_f') | S_f]
/// with S_f = V_rx chol(V_xx)^{-T}.
FactorModel to_continuous(const DiscreteEstimates& est, const ContinuousOptions& options = {});

struct CalibrationReport {
  FactorModel model;
  DiscreteEstimates estimates;
  ContinuousOptions options;
};

CalibrationReport calibrate(const TimeSeriesData& data, const UnitConventions& units = {},
                            const ContinuousOptions& options = {});

/// Published monthly regression estimates for S&P 500 excess returns and the
/// 3-month T-bill rate, 1970-2000, in percent units.
DiscreteEstimates sp500_table_estimates();

io::Json estimates_to_json(const DiscreteEstimates& est);
DiscreteEstimates estimates_from_json(const io::Json& j);
io::Json report_to_json(const CalibrationReport& report);

}  // namespace asymalloc::calibration
