#include "asymalloc/errors.hpp"
#include "asymalloc/moments.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace asymalloc;
using asymalloc::testing::kronecker_lyapunov;
using asymalloc::testing::random_model;
using asymalloc::testing::random_strategy;
using asymalloc::testing::rel_diff;

namespace {

Strategy scalar(double h, double H) { return {Vector::Constant(1, h), Matrix::Constant(1, 1, H)}; }

}  // namespace

// Values at h = 1, H = 0 worked out by hand from the scalar model:
// u has drift a + A x - s2/2 and noise sigma dW1 + eta dW2, so
//   K = a - s2/2,
//   P = (Delta (-A) - lambda eta) / B,
//   varRate = sigma^2 + (eta - lambda A / B)^2.
TEST(MomentsFrozen, FixtureAtUnitHolding) {
  const auto p = sp500_fixture_params();
  const double s2 = p.sigma * p.sigma + p.eta * p.eta;
  const double delta = p.lambda * p.lambda / (-2.0 * p.B);
  const auto mo = moments(sp500_fixture(), scalar(1.0, 0.0));

  EXPECT_NEAR(delta, 9.537200238095238, 1e-12);
  EXPECT_NEAR(mo.Delta(0, 0), delta, 1e-12);
  EXPECT_NEAR(mo.K, p.a - 0.5 * s2, 1e-15);
  EXPECT_NEAR(mo.K, 0.0189506310615, 1e-12);
  EXPECT_NEAR(mo.P(0), (delta * -p.A - p.lambda * p.eta) / p.B, 1e-12);
  EXPECT_NEAR(mo.P(0), -5.31903296201814, 1e-10);
  const double y2 = p.eta - p.lambda * p.A / p.B;
  EXPECT_NEAR(mo.varRate, p.sigma * p.sigma + y2 * y2, 1e-14);
  EXPECT_NEAR(mo.varRate, 0.127168773802907, 1e-12);
  EXPECT_NEAR(mo.S(0, 0), 0.0, 1e-15);
}

TEST(MomentsFrozen, FixtureTable) {
  // Frozen from the matrix path; the scalar path is checked against it below.
  const auto mo = moments(sp500_fixture(), scalar(1.0, 1.0));
  const auto sc = scalar_moments(sp500_fixture_params(), 1.0, 1.0);
  EXPECT_LT(rel_diff(mo.K, sc.K), 1e-12);
  EXPECT_LT(rel_diff(mo.varRate, sc.varRate), 1e-12);
  EXPECT_LT(rel_diff(mo.P(0), sc.P(0)), 1e-12);
  EXPECT_LT(rel_diff(mo.S(0, 0), sc.S(0, 0)), 1e-12);
}

TEST(MomentsScalar, AgreesWithMatrixPathOnGrid) {
  const auto p = sp500_fixture_params();
  const MomentEngine engine(sp500_fixture());
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double h = -3.0 + 0.3 * i, H = -3.0 + 0.3 * j;
      const auto a = engine.moments(scalar(h, H));
      const auto b = scalar_moments(p, h, H);
      EXPECT_LT(rel_diff(a.K, b.K), 1e-10) << h << "," << H;
      EXPECT_LT(rel_diff(a.varRate, b.varRate), 1e-10) << h << "," << H;
      if (h != 0.0 || H != 0.0) EXPECT_LT(rel_diff(a.P(0), b.P(0)), 1e-10) << h << "," << H;
    }
  }
}

TEST(MomentsScalar, OtherParameterSets) {
  const ScalarModelParams sets[] = {
      {0.01, 0.03, -0.5, 0.05, -0.02, 0.3}, {-0.02, -0.1, -2.0, 0.2, 0.1, 1.5}, {0.0, 0.0, -0.01, 0.01, 0.0, 0.1}};
  for (const auto& p : sets) {
    const MomentEngine engine(make_scalar_model(p));
    for (double h : {-1.0, 0.3, 2.0}) {
      for (double H : {-2.0, 0.0, 0.7}) {
        const auto a = engine.moments(scalar(h, H));
        const auto b = scalar_moments(p, h, H);
        EXPECT_NEAR(a.K, b.K, 1e-12 * (1 + std::abs(b.K)));
        EXPECT_NEAR(a.varRate, b.varRate, 1e-11 * (1 + std::abs(b.varRate)));
        EXPECT_NEAR(a.P(0), b.P(0), 1e-11 * (1 + std::abs(b.P(0))));
      }
    }
  }
}

TEST(MomentsScalar, RequiresNegativeB) {
  auto p = sp500_fixture_params();
  p.B = 0.0;
  EXPECT_THROW(scalar_moments(p, 1.0, 0.0), PreconditionError);
}

TEST(MomentsProperty, RandomModelsInvariants) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 1 + trial % 3, n = 1 + (trial / 3) % 4;
    const FactorModel model = random_model(rng, m, n);
    const Strategy s = random_strategy(rng, m, n);
    const auto mo = moments(model, s);

    // Delta against the vectorized oracle.
    const Matrix LL = model.Lambda() * model.Lambda().transpose();
    const Matrix Dk = kronecker_lyapunov(model.B(), -LL);
    EXPECT_LE((mo.Delta - Dk).norm(), 1e-8 * Dk.norm());
    EXPECT_TRUE(linalg::is_symmetric(mo.Delta));
    EXPECT_GE(linalg::min_symmetric_eigenvalue(mo.Delta), -1e-12 * mo.Delta.norm());

    // S is the symmetric solution of the symmetrized equation.
    const Matrix C = model.assetCovariance();
    const Matrix HtA = s.H.transpose() * model.A();
    const Matrix HtCH = s.H.transpose() * C * s.H;
    const Matrix LS = model.Lambda() * model.Sigma().transpose();
    const Matrix rhs = -2.0 * mo.Delta * HtA * mo.Delta + mo.Delta * HtCH * mo.Delta - 2.0 * LS * s.H * mo.Delta;
    const Matrix Sk = linalg::symmetrize(kronecker_lyapunov(model.B(), rhs));
    EXPECT_LE((mo.S - Sk).norm(), 1e-8 * (1 + Sk.norm()));
    EXPECT_TRUE(linalg::is_symmetric(mo.S));

    EXPECT_GE(mo.varRate, -1e-12);
    EXPECT_LE((mo.R - mo.K * mo.Delta).norm(), 1e-14 * (1 + mo.R.norm()));
    EXPECT_EQ(mo.P.size(), n);
    EXPECT_EQ(mo.Y.size(), m + n);
  }
}

TEST(MomentsProperty, ConstantStrategyScaling) {
  // With H = 0, varRate is quadratic in h and K - h'a is too.
  std::mt19937_64 rng(4);
  const FactorModel model = random_model(rng, 2, 2);
  Strategy s{Vector::Constant(2, 0.7), Matrix::Zero(2, 2)};
  const auto one = moments(model, s);
  s.h *= 3.0;
  const auto three = moments(model, s);
  EXPECT_NEAR(three.varRate, 9.0 * one.varRate, 1e-12);
  EXPECT_NEAR(three.P(1), 3.0 * one.P(1), 1e-12 * (1 + std::abs(one.P(1))));
  const double lin = 0.7 * model.a().sum();
  EXPECT_NEAR(three.K - 3.0 * lin, 9.0 * (one.K - lin), 1e-13);
}

TEST(MomentsProperty, EngineMatchesFreeFunctions) {
  std::mt19937_64 rng(12);
  const FactorModel model = random_model(rng, 2, 3);
  const MomentEngine engine(model);
  const Strategy s = random_strategy(rng, 2, 3);
  EXPECT_DOUBLE_EQ(engine.growthRate(s), growth_rate(model, s));
  EXPECT_EQ(engine.covarianceLimit(s), covariance_limit(model, s));
  EXPECT_DOUBLE_EQ(engine.varianceRate(s).varRate, variance_rate(model, s).varRate);
  EXPECT_EQ(engine.delta(), stationary_covariance(model));
}

TEST(MomentsProperty, ZeroStrategyHasZeroMoments) {
  const auto mo = moments(sp500_fixture(), Strategy::zero(1, 1));
  EXPECT_EQ(mo.K, 0.0);
  EXPECT_EQ(mo.varRate, 0.0);
  EXPECT_EQ(mo.P(0), 0.0);
}

TEST(MomentsErrors, StrategyShapeMismatch) {
  EXPECT_THROW(moments(sp500_fixture(), Strategy::zero(2, 1)), DimensionError);
}
