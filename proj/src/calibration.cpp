#include "asymalloc/calibration.hpp"

#include "asymalloc/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace asymalloc::calibration {

namespace {

std::string regressor_name(Eigen::Index col) {
  return col == 0 ? "constant" : "factor_" + std::to_string(col) + " (lagged)";
}

// Names the first regressor that is (numerically) a combination of the earlier ones.
void check_rank(const Matrix& Z) {
  for (Eigen::Index c = 0; c < Z.cols(); ++c) {
    const Vector col = Z.col(c);
    const double scale = col.norm();
    double resid = scale;
    if (c > 0 && scale > 0.0) {
      const Matrix prev = Z.leftCols(c);
      const Vector fit = prev * prev.colPivHouseholderQr().solve(col);
      resid = (col - fit).norm();
    }
    if (!(scale > 0.0) || resid <= 1e-10 * scale) {
      std::string others;
      for (Eigen::Index p = 0; p < c; ++p) others += (p ? ", " : "") + regressor_name(p);
      throw DataError("rank-deficient regressors: " + regressor_name(c) +
                      (c == 0 ? " is zero" : " is collinear with " + others));
    }
  }
}

}  // namespace

DiscreteEstimates estimate_discrete(const TimeSeriesData& data, const UnitConventions& units) {
  check_time_series(data);
  const Eigen::Index T = data.length();
  const Eigen::Index m = data.excessReturns.cols(), n = data.factorLevels.cols();

  DiscreteEstimates est;
  est.units = units;
  est.factorMeans = data.factorLevels.colwise().mean().transpose();
  const Matrix x = data.factorLevels.rowwise() - est.factorMeans.transpose();

  const Eigen::Index N = T - 1;
  Matrix Z(N, 1 + n);
  Z.col(0).setOnes();
  Z.rightCols(n) = x.topRows(N);
  check_rank(Z);

  Matrix Y(N, m + n);
  Y.leftCols(m) = data.excessReturns.bottomRows(N);
  Y.rightCols(n) = x.bottomRows(N);

  const auto qr = Z.colPivHouseholderQr();
  const Matrix coef = qr.solve(Y);  // (1+n) x (m+n)
  const Matrix resid = Y - Z * coef;
  const double dof = static_cast<double>(N - (1 + n));
  if (dof <= 0) throw DataError("too few observations for the number of regressors");
  est.innovationCovariance = resid.transpose() * resid / dof;
  const Vector zzInvDiag = (Z.transpose() * Z).inverse().diagonal();

  Matrix tr(m + n, 1 + n);
  for (Eigen::Index eq = 0; eq < m + n; ++eq) {
    const double s2 = est.innovationCovariance(eq, eq);
    for (Eigen::Index r = 0; r < 1 + n; ++r) tr(eq, r) = coef(r, eq) / std::sqrt(s2 * zzInvDiag(r));
  }
  const Matrix coefT = coef.transpose();
  est.returnCoefficients = coefT.topRows(m);
  est.factorCoefficients = coefT.bottomRows(n);
  est.returnTRatios = tr.topRows(m);
  est.factorTRatios = tr.bottomRows(n);
  est.observations = N;
  return est;
}

FactorModel to_continuous(const DiscreteEstimates& est, const ContinuousOptions& opt) {
  const int m = est.m(), n = est.n();
  if (est.returnCoefficients.cols() != 1 + n || est.factorCoefficients.cols() != 1 + n ||
      est.innovationCovariance.rows() != m + n || est.innovationCovariance.cols() != m + n) {
    throw DimensionError("discrete estimates have inconsistent shapes");
  }
  // Scale factors into decimal returns and percentage-point factors.
  const double rs = est.units.returnsInPercent ? 0.01 : 1.0;
  const double fs = est.units.factorsInPercent ? 1.0 : 100.0;

  ModelFields f;
  f.a = est.returnCoefficients.col(0) * rs;
  f.A = est.returnCoefficients.rightCols(n) * (rs / fs);

  const Matrix Phi = est.factorCoefficients.rightCols(n);
  const Eigen::VectorXcd phiEig = Phi.eigenvalues();
  if (phiEig.cwiseAbs().maxCoeff() >= 1.0) {
    throw NumericError("factor persistence has spectral radius >= 1; no stationary continuous model");
  }
  if (opt.logPersistence) {
    f.B = Phi.log();
  } else {
    f.B = Phi - Matrix::Identity(n, n);
  }
  const auto stab = linalg::check_stability(f.B);
  if (stab.margin >= -opt.minMeanReversion) {
    throw NumericError("factor is near a unit root: mean reversion " + io::format_double(-stab.margin) +
                       " per month is below the minimum " + io::format_double(opt.minMeanReversion));
  }

  const Matrix Vrr = est.innovationCovariance.topLeftCorner(m, m) * (rs * rs);
  const Matrix Vrx = est.innovationCovariance.topRightCorner(m, n) * (rs * fs);
  const Matrix Vxx = est.innovationCovariance.bottomRightCorner(n, n) * (fs * fs);

  const Eigen::LLT<Matrix> lltX(Vxx);
  if (lltX.info() != Eigen::Success) throw NumericError("factor innovation covariance is not positive definite");
  const Matrix Lx = lltX.matrixL();
  // Sf Lx' = Vrx
  const Matrix Sf = Lx.triangularView<Eigen::Lower>().solve(Vrx.transpose()).transpose();
  const Matrix residual = Vrr - Sf * Sf.transpose();
  const Eigen::LLT<Matrix> lltR(residual);
  if (lltR.info() != Eigen::Success || (residual.diagonal().array() <= 0.0).any()) {
    throw NumericError("cross-correlation too large for factorization");
  }

  f.Sigma.resize(m, m + n);
  f.Sigma.leftCols(m) = lltR.matrixL();
  f.Sigma.rightCols(n) = Sf;
  f.Lambda = Matrix::Zero(n, m + n);
  f.Lambda.rightCols(n) = Lx;
  return validate_model(std::move(f));
}

CalibrationReport calibrate(const TimeSeriesData& data, const UnitConventions& units,
                            const ContinuousOptions& options) {
  auto est = estimate_discrete(data, units);
  auto model = to_continuous(est, options);
  return {std::move(model), std::move(est), options};
}

DiscreteEstimates sp500_table_estimates() {
  DiscreteEstimates e;
  e.returnCoefficients = (Matrix(1, 2) << 1.993, -1.177).finished();
  e.returnTRatios = (Matrix(1, 2) << 3.505, -14.220).finished();
  e.factorCoefficients = (Matrix(1, 2) << 0.120, 0.979).finished();
  e.factorTRatios = (Matrix(1, 2) << 0.911, 42.885).finished();
  e.innovationCovariance = (Matrix(2, 2) << 19.587, 0.0553, 0.0553, 0.4006).finished();
  e.factorMeans = Vector::Zero(1);
  e.observations = 371;  // January 1970 to December 2000, one lag
  e.units = {.returnsInPercent = true, .factorsInPercent = true};
  return e;
}

io::Json estimates_to_json(const DiscreteEstimates& e) {
  io::Json j;
  j["v"] = io::kSchemaVersion;
  j["m"] = e.m();
  j["n"] = e.n();
  j["observations"] = e.observations;
  j["units"] = {{"returns", e.units.returnsInPercent ? "percent" : "decimal"},
                {"factors", e.units.factorsInPercent ? "percent" : "decimal"}};
  j["return_coefficients"] = io::matrix_to_json(e.returnCoefficients);
  j["return_t_ratios"] = io::matrix_to_json(e.returnTRatios);
  j["factor_coefficients"] = io::matrix_to_json(e.factorCoefficients);
  j["factor_t_ratios"] = io::matrix_to_json(e.factorTRatios);
  j["innovation_covariance"] = io::matrix_to_json(e.innovationCovariance);
  j["factor_means"] = io::vector_to_json(e.factorMeans);
  return j;
}

DiscreteEstimates estimates_from_json(const io::Json& j) {
  auto need = [&](const char* key) -> const io::Json& {
    if (!j.contains(key)) throw DataError(std::string("estimates JSON is missing field '") + key + "'");
    return j.at(key);
  };
  if (!j.is_object() || need("v") != io::kSchemaVersion) {
    throw DataError("unsupported estimates schema (expected v=1)");
  }
  auto unit = [&](const char* key) {
    const auto& u = need("units");
    if (!u.contains(key) || !u.at(key).is_string()) throw DataError(std::string("units.") + key + " missing");
    const auto s = u.at(key).get<std::string>();
    if (s != "percent" && s != "decimal") throw DataError(std::string("units.") + key + " must be percent or decimal");
    return s == "percent";
  };
  DiscreteEstimates e;
  e.returnCoefficients = io::matrix_from_json(need("return_coefficients"), "return_coefficients");
  e.returnTRatios = io::matrix_from_json(need("return_t_ratios"), "return_t_ratios");
  e.factorCoefficients = io::matrix_from_json(need("factor_coefficients"), "factor_coefficients");
  e.factorTRatios = io::matrix_from_json(need("factor_t_ratios"), "factor_t_ratios");
  e.innovationCovariance = io::matrix_from_json(need("innovation_covariance"), "innovation_covariance");
  e.factorMeans = j.contains("factor_means") ? io::vector_from_json(j.at("factor_means"), "factor_means")
                                             : Vector::Zero(e.factorCoefficients.rows());
  e.observations = need("observations").get<long>();
  e.units = {unit("returns"), unit("factors")};
  return e;
}

io::Json report_to_json(const CalibrationReport& r) {
  io::Json j;
  j["v"] = io::kSchemaVersion;
  j["model"] = io::model_to_json(r.model);
  j["estimates"] = estimates_to_json(r.estimates);
  j["unit_conventions"] = {
      {"input_returns", r.estimates.units.returnsInPercent ? "percent" : "decimal"},
      {"input_factors", r.estimates.units.factorsInPercent ? "percent" : "decimal"},
      {"model_returns", "decimal"},
      {"model_factors", "percent"},
      {"time_unit", "month"},
      {"persistence_map", r.options.logPersistence ? "B = log(Phi)" : "B = Phi - I"}};
  return j;
}

}  // namespace asymalloc::calibration
