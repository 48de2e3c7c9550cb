#include "asymalloc/moments.hpp"

#include "asymalloc/errors.hpp"

#include <cmath>

namespace asymalloc {

MomentEngine::MomentEngine(FactorModel model)
    : model_(std::move(model)),
      C_(model_.assetCovariance()),
      LambdaSigmaT_(model_.Lambda() * model_.Sigma().transpose()),
      lyap_(model_.B()),
      delta_(lyap_.solve(-(model_.Lambda() * model_.Lambda().transpose()))),
      luB_(model_.B()),
      luBt_(model_.B().transpose()) {}

// b = H' C h - A' h - H' a. Its transpose is the row vector multiplying B^{-1} in Y.
Vector MomentEngine::driftSensitivity(const Strategy& s) const {
  return s.H.transpose() * (C_ * s.h) - model_.A().transpose() * s.h -
         s.H.transpose() * model_.a();
}

double MomentEngine::growthRate(const Strategy& s) const {
  check_strategy(model_, s);
  const Matrix HtA = s.H.transpose() * model_.A();
  const Matrix HtCH = s.H.transpose() * C_ * s.H;
  return s.h.dot(model_.a()) - 0.5 * s.h.dot(C_ * s.h) + (delta_ * (HtA - 0.5 * HtCH)).trace();
}

Vector MomentEngine::covarianceLimit(const Strategy& s) const {
  check_strategy(model_, s);
  const Vector rhs = delta_ * driftSensitivity(s) - LambdaSigmaT_ * s.h;
  return luB_.solve(rhs);
}

VarianceRate MomentEngine::varianceRate(const Strategy& s) const {
  check_strategy(model_, s);
  VarianceRate out;
  // Y' = Lambda' B'^{-1} b + Sigma' h
  const Vector z = luBt_.solve(driftSensitivity(s));
  out.Y = model_.Lambda().transpose() * z + model_.Sigma().transpose() * s.h;

  const Matrix HtA = s.H.transpose() * model_.A();
  const Matrix HtCH = s.H.transpose() * C_ * s.H;
  const Matrix rhs = -2.0 * delta_ * HtA * delta_ + delta_ * HtCH * delta_ -
                     2.0 * LambdaSigmaT_ * s.H * delta_;
  // The right-hand side is symmetric only when n = 1. The variance rate needs the
  // symmetric part of the solution, which solves the symmetrized equation.
  out.S = linalg::symmetrize(lyap_.solve(rhs));

  out.varRate = out.Y.squaredNorm() + (2.0 * out.S * HtA + (delta_ - out.S) * HtCH).trace();
  return out;
}

AsymptoticMoments MomentEngine::moments(const Strategy& s) const {
  AsymptoticMoments mo;
  mo.Delta = delta_;
  mo.K = growthRate(s);
  mo.P = covarianceLimit(s);
  auto vr = varianceRate(s);
  mo.varRate = vr.varRate;
  mo.Y = std::move(vr.Y);
  mo.S = std::move(vr.S);
  mo.R = mo.K * mo.Delta;
  return mo;
}

Matrix stationary_covariance(const FactorModel& model) {
  return linalg::solve_lyapunov_const(model.B(), model.Lambda() * model.Lambda().transpose());
}

double growth_rate(const FactorModel& model, const Strategy& s) {
  return MomentEngine(model).growthRate(s);
}

Vector covariance_limit(const FactorModel& model, const Strategy& s) {
  return MomentEngine(model).covarianceLimit(s);
}

VarianceRate variance_rate(const FactorModel& model, const Strategy& s) {
  return MomentEngine(model).varianceRate(s);
}

AsymptoticMoments moments(const FactorModel& model, const Strategy& s) {
  return MomentEngine(model).moments(s);
}

AsymptoticMoments scalar_moments(const ScalarModelParams& p, double h, double H) {
  if (!(p.B < 0.0)) throw PreconditionError("scalar_moments: B must be negative");
  const double a = p.a, A = p.A, B = p.B;
  const double sigma = p.sigma, eta = p.eta, lambda = p.lambda;
  const double s2 = sigma * sigma + eta * eta;
  const double l2 = lambda * lambda;
  // Stationary factor variance lambda^2 / (-2B).
  const double delta = -l2 / (2.0 * B);

  AsymptoticMoments mo;
  mo.Delta = Matrix::Constant(1, 1, delta);
  mo.K = h * a - l2 / (2.0 * B) * H * A - s2 / 2.0 * (h * h - l2 / (2.0 * B) * H * H);

  const double drift = h * H * s2 - A * h - H * a;
  mo.P = Vector::Constant(1, -l2 / (2.0 * B * B) * drift - lambda * eta / B * h);

  mo.Y = Vector(2);
  mo.Y << h * sigma, drift / B * lambda + h * eta;

  const double S = l2 / (4.0 * B * B) *
                   (-2.0 * H * A * l2 / (2.0 * B) + l2 / (2.0 * B) * H * H * s2 + 2.0 * H * lambda * eta);
  mo.S = Matrix::Constant(1, 1, S);

  mo.varRate = mo.Y.squaredNorm() + 2.0 * S * H * A + (-l2 / (2.0 * B) - S) * H * H * s2;
  mo.R = mo.K * mo.Delta;
  return mo;
}

}  // namespace asymalloc
