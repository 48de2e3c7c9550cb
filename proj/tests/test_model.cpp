#include "asymalloc/errors.hpp"
#include "asymalloc/io.hpp"
#include "asymalloc/model.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace asymalloc;

namespace {

ModelFields fixture_fields() { return sp500_fixture().fields(); }

}  // namespace

TEST(ValidateModel, AcceptsFixture) {
  const FactorModel m = sp500_fixture();
  EXPECT_EQ(m.m(), 1);
  EXPECT_EQ(m.n(), 1);
  EXPECT_DOUBLE_EQ(m.Sigma()(0, 0), 0.044249);
  EXPECT_DOUBLE_EQ(m.Sigma()(0, 1), 0.000874);
  EXPECT_DOUBLE_EQ(m.Lambda()(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(m.Lambda()(0, 1), 0.6329);
}

TEST(ValidateModel, RejectsWrongShapes) {
  auto f = fixture_fields();
  f.Sigma = Matrix::Ones(1, 3);
  try {
    validate_model(f);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_TRUE(e.has("dimension"));
    EXPECT_NE(std::string(e.what()).find("Sigma"), std::string::npos);
  }
}

TEST(ValidateModel, RejectsUnstableB) {
  for (double b : {0.0, 0.01}) {
    auto f = fixture_fields();
    f.B(0, 0) = b;
    try {
      validate_model(f);
      FAIL();
    } catch (const ValidationError& e) {
      EXPECT_TRUE(e.has("stability"));
    }
  }
}

TEST(ValidateModel, RejectsNonFinite) {
  auto f = fixture_fields();
  f.A(0, 0) = std::numeric_limits<double>::infinity();
  try {
    validate_model(f);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_TRUE(e.has("finite"));
  }
}

TEST(ValidateModel, RejectsRedundantAssets) {
  ModelFields f;
  f.a = Vector::Constant(2, 0.01);
  f.A = Matrix::Zero(2, 1);
  f.B = Matrix::Constant(1, 1, -0.1);
  f.Sigma = Matrix(2, 3);
  f.Sigma << 0.04, 0.01, 0.0, 0.08, 0.02, 0.0;
  f.Lambda = Matrix(1, 3);
  f.Lambda << 0, 0, 0.5;
  try {
    validate_model(f);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_TRUE(e.has("sigma_rank"));
  }
}

TEST(ValidateModel, ReportsAllViolationsTogether) {
  auto f = fixture_fields();
  f.B(0, 0) = 0.5;
  f.Sigma.setZero();
  try {
    validate_model(f);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_TRUE(e.has("stability"));
    EXPECT_TRUE(e.has("sigma_rank"));
  }
}

TEST(ValidateModel, Idempotent) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const FactorModel m = asymalloc::testing::random_model(rng, 1 + k % 3, 1 + k % 4);
    const FactorModel again = validate_model(m.fields());
    EXPECT_EQ(again.B(), m.B());
    EXPECT_EQ(again.Sigma(), m.Sigma());
  }
}

TEST(Strategy, ShapeChecks) {
  const FactorModel m = sp500_fixture();
  EXPECT_NO_THROW(check_strategy(m, Strategy::zero(1, 1)));
  EXPECT_THROW(check_strategy(m, Strategy::zero(2, 1)), DimensionError);
  EXPECT_THROW(check_strategy(m, {Vector::Ones(1), Matrix::Zero(1, 2)}), DimensionError);
  EXPECT_THROW(check_strategy(m, {Vector::Constant(1, NAN), Matrix::Zero(1, 1)}), PreconditionError);
}

TEST(CriterionParamsCheck, RejectsNegativeThetaAndBadGamma) {
  const FactorModel m = sp500_fixture();
  EXPECT_NO_THROW(check_params(m, {0.0, Vector::Zero(1)}));
  EXPECT_THROW(check_params(m, {-1.0, Vector::Zero(1)}), PreconditionError);
  EXPECT_THROW(check_params(m, {1.0, Vector::Zero(2)}), DimensionError);
}

TEST(ModelJson, RoundTripIsExact) {
  std::mt19937_64 rng(9);
  const FactorModel m = asymalloc::testing::random_model(rng, 2, 3);
  const auto path = std::filesystem::temp_directory_path() / "asymalloc_model_rt.json";
  io::write_model(path, m);
  const FactorModel back = io::read_model(path);
  EXPECT_EQ(back.a(), m.a());
  EXPECT_EQ(back.A(), m.A());
  EXPECT_EQ(back.B(), m.B());
  EXPECT_EQ(back.Sigma(), m.Sigma());
  EXPECT_EQ(back.Lambda(), m.Lambda());
  std::filesystem::remove(path);
}

TEST(ModelJson, SchemaErrors) {
  io::Json j = io::model_to_json(sp500_fixture());
  j.erase("B");
  EXPECT_THROW(io::model_from_json(j), DataError);
  j = io::model_to_json(sp500_fixture());
  j["v"] = 7;
  EXPECT_THROW(io::model_from_json(j), DataError);
  j = io::model_to_json(sp500_fixture());
  j["B"] = io::Json::parse("[[0.2]]");
  EXPECT_THROW(io::model_from_json(j), ValidationError);
  j = io::model_to_json(sp500_fixture());
  j["Sigma"] = io::Json::parse("[[0.1, \"x\"]]");
  EXPECT_THROW(io::model_from_json(j), DataError);
}

TEST(FormatDouble, ShortestRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -5.31903296201814, 1e-300, 6.02e23}) {
    EXPECT_EQ(std::stod(io::format_double(x)), x);
  }
  EXPECT_EQ(io::format_double(0.1), "0.1");
}

TEST(Sha256, KnownDigest) {
  const auto path = std::filesystem::temp_directory_path() / "asymalloc_sha.txt";
  io::write_text(path, "abc");
  EXPECT_EQ(io::sha256_file(path), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  std::filesystem::remove(path);
}
