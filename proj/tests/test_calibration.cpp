#include "asymalloc/calibration.hpp"
#include "asymalloc/errors.hpp"
#include "asymalloc/mc_oracle.hpp"
#include "asymalloc/timeseries.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace asymalloc;
using namespace asymalloc::calibration;
using asymalloc::testing::rel_diff;

namespace {

FactorModel identified_model() {
  return make_scalar_model({0.02, -0.02, -0.2, 0.04, 0.03, 0.5});
}

TimeSeriesData small_series(long months, std::uint64_t seed = 3) {
  return mc::simulate_discrete(identified_model(), months, seed, mc::FactorScheme::euler);
}

}  // namespace

TEST(TableMapping, CalibratedConstants) {
  const FactorModel m = to_continuous(sp500_table_estimates());
  EXPECT_LT(rel_diff(m.a()(0), 0.01993), 5e-4);
  EXPECT_LT(rel_diff(m.A()(0, 0), -0.01177), 5e-4);
  EXPECT_LT(rel_diff(m.B()(0, 0), -0.021), 5e-4);
  EXPECT_LT(rel_diff(m.Lambda()(0, 1), 0.6329), 5e-4);
  EXPECT_LT(rel_diff(m.Sigma()(0, 1), 0.000874), 5e-4);
  EXPECT_LT(rel_diff(m.Sigma()(0, 0), 0.044249), 5e-4);
  EXPECT_EQ(m.Lambda()(0, 0), 0.0);
}

TEST(TableMapping, LogPersistenceOption) {
  const FactorModel m = to_continuous(sp500_table_estimates(), {.logPersistence = true});
  EXPECT_NEAR(m.B()(0, 0), std::log(0.979), 1e-14);
}

TEST(TableMapping, DecimalUnitsScale) {
  auto e = sp500_table_estimates();
  e.units = {.returnsInPercent = false, .factorsInPercent = false};
  e.returnCoefficients << 0.01993, -1.177;
  e.innovationCovariance << 0.0019587, 0.0553e-4, 0.0553e-4, 0.4006e-4;
  const FactorModel m = to_continuous(e);
  const FactorModel ref = to_continuous(sp500_table_estimates());
  EXPECT_NEAR(m.A()(0, 0), ref.A()(0, 0), 1e-15);
  EXPECT_NEAR(m.Lambda()(0, 1), ref.Lambda()(0, 1), 1e-12);
  EXPECT_NEAR(m.Sigma()(0, 1), ref.Sigma()(0, 1), 1e-15);
}

TEST(TableMapping, RejectsUnitRootAndNearUnitRoot) {
  auto e = sp500_table_estimates();
  e.factorCoefficients(0, 1) = 1.0;
  EXPECT_THROW(to_continuous(e), NumericError);
  e.factorCoefficients(0, 1) = 0.999999;
  EXPECT_THROW(to_continuous(e), NumericError);
}

TEST(TableMapping, RejectsExcessiveCrossCorrelation) {
  auto e = sp500_table_estimates();
  e.innovationCovariance(0, 1) = e.innovationCovariance(1, 0) = std::sqrt(19.587 * 0.4006) * 1.01;
  try {
    to_continuous(e);
    FAIL();
  } catch (const NumericError& err) {
    EXPECT_NE(std::string(err.what()).find("cross-correlation"), std::string::npos);
  }
}

TEST(TableMapping, JsonRoundTrip) {
  const auto e = sp500_table_estimates();
  const auto back = estimates_from_json(estimates_to_json(e));
  EXPECT_EQ(back.returnCoefficients, e.returnCoefficients);
  EXPECT_EQ(back.innovationCovariance, e.innovationCovariance);
  EXPECT_EQ(back.units.returnsInPercent, true);
  EXPECT_EQ(back.observations, 371);
}

TEST(EstimateDiscrete, RecoversGeneratingVar) {
  const long N = 1'000'000;
  const auto data = small_series(N, 17);
  const auto est = estimate_discrete(data);
  const FactorModel truth = identified_model();
  // Coefficient standard errors from the reported t-ratios.
  auto within = [](double est, double t, double target) {
    const double se = std::abs(est / t);
    return std::abs(est - target) <= 4.0 * se;
  };
  EXPECT_TRUE(within(est.returnCoefficients(0, 0), est.returnTRatios(0, 0), truth.a()(0)));
  EXPECT_TRUE(within(est.returnCoefficients(0, 1), est.returnTRatios(0, 1), truth.A()(0, 0)));
  EXPECT_TRUE(within(est.factorCoefficients(0, 1), est.factorTRatios(0, 1), 1.0 + truth.B()(0, 0)));
  // Persistence and innovation variances to 3 significant figures.
  EXPECT_LT(rel_diff(est.factorCoefficients(0, 1), 0.8), 5e-3);
  const Matrix V = truth.fields().Sigma * truth.fields().Sigma.transpose();
  EXPECT_LT(rel_diff(est.innovationCovariance(0, 0), V(0, 0)), 5e-3);
  EXPECT_LT(rel_diff(est.innovationCovariance(1, 1), 0.25), 5e-3);
  EXPECT_EQ(est.observations, N - 1);
  EXPECT_TRUE(est.returnTRatios.allFinite());
}

TEST(EstimateDiscrete, ConstantFactorIsRankDeficient) {
  auto data = small_series(100);
  data.factorLevels.setConstant(5.0);
  try {
    estimate_discrete(data);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("factor_1"), std::string::npos);
  }
}

TEST(EstimateDiscrete, CollinearFactorsNamed) {
  const FactorModel two = make_scalar_model({0.02, -0.02, -0.2, 0.04, 0.03, 0.5});
  auto base = mc::simulate_discrete(two, 200, 4, mc::FactorScheme::euler);
  TimeSeriesData d;
  d.dates = base.dates;
  d.excessReturns = base.excessReturns;
  d.factorLevels.resize(base.length(), 2);
  d.factorLevels.col(0) = base.factorLevels.col(0);
  d.factorLevels.col(1) = 2.0 * base.factorLevels.col(0);
  try {
    estimate_discrete(d);
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("factor_2"), std::string::npos);
    EXPECT_NE(msg.find("factor_1"), std::string::npos);
  }
}

TEST(TimeSeries, CsvRoundTrip) {
  const auto data = small_series(30);
  const auto back = parse_time_series_csv(time_series_to_csv(data));
  EXPECT_EQ(back.dates, data.dates);
  EXPECT_EQ(back.excessReturns, data.excessReturns);
  EXPECT_EQ(back.factorLevels, data.factorLevels);
  EXPECT_EQ(data.dates.front(), "1970-01");
  EXPECT_EQ(data.dates.back(), "1972-06");
}

TEST(TimeSeries, CsvErrorsNameTheProblem) {
  const auto text = time_series_to_csv(small_series(30));
  auto expect_msg = [](const std::string& csv, const std::string& needle) {
    try {
      parse_time_series_csv(csv);
      ADD_FAILURE() << "no error for " << needle;
    } catch (const DataError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_msg("date,excess_return_1\n1970-01,0.1\n", "factor_1");
  expect_msg("date,excess_return_1,rate\n", "rate");
  std::string missing = text;
  missing.replace(missing.find('\n') + 9, 1, ",");  // damages row 2
  expect_msg(missing, "row 2");
  const auto short_text = text.substr(0, text.find("1971-01"));
  expect_msg(short_text, "24");
}

TEST(TimeSeries, RejectsOutOfOrderDates) {
  auto d = small_series(30);
  std::swap(d.dates[3], d.dates[4]);
  EXPECT_THROW(check_time_series(d), DataError);
}

TEST(TimeSeries, MonthLabels) {
  EXPECT_EQ(month_label("1970-01", 0), "1970-01");
  EXPECT_EQ(month_label("1970-01", 12), "1971-01");
  EXPECT_EQ(month_label("1999-11", 3), "2000-02");
  EXPECT_EQ(month_label("9999-12", 1), "10000-01");
  EXPECT_THROW(month_label("1970-1", 1), DataError);
  EXPECT_THROW(month_label("1970-13", 1), DataError);
}
