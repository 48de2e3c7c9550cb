#include "asymalloc/model.hpp"

#include "asymalloc/errors.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace asymalloc {

namespace {

std::string shape(const Matrix& M) {
  return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

}  // namespace

FactorModel validate_model(ModelFields f) {
  std::vector<ValidationError::Violation> bad;
  const auto m = f.a.size();
  const auto n = f.B.rows();

  if (m == 0) bad.push_back({"dimension", "model needs at least one asset (a is empty)"});
  if (f.B.rows() != f.B.cols()) bad.push_back({"dimension", "B must be square, got " + shape(f.B)});
  if (f.A.rows() != m || f.A.cols() != n) {
    bad.push_back({"dimension", "A must be " + std::to_string(m) + "x" + std::to_string(n) +
                                    ", got " + shape(f.A)});
  }
  if (f.Sigma.rows() != m || f.Sigma.cols() != m + n) {
    bad.push_back({"dimension", "Sigma must be " + std::to_string(m) + "x" + std::to_string(m + n) +
                                    ", got " + shape(f.Sigma)});
  }
  if (f.Lambda.rows() != n || f.Lambda.cols() != m + n) {
    bad.push_back({"dimension", "Lambda must be " + std::to_string(n) + "x" +
                                    std::to_string(m + n) + ", got " + shape(f.Lambda)});
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));

  const std::pair<const char*, const Matrix*> named[] = {
      {"A", &f.A}, {"B", &f.B}, {"Sigma", &f.Sigma}, {"Lambda", &f.Lambda}};
  if (!f.a.allFinite()) bad.push_back({"finite", "a has non-finite entries"});
  for (const auto& [name, M] : named) {
    if (!M->allFinite()) bad.push_back({"finite", std::string(name) + " has non-finite entries"});
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));

  const auto stab = linalg::check_stability(f.B);
  if (!stab.isStable) {
    bad.push_back({"stability", "B is not stable: max eigenvalue real part " +
                                    std::to_string(stab.margin)});
  }
  const Matrix cov = f.Sigma * f.Sigma.transpose();
  const double floor = 1e-12 * cov.trace();
  if (!(cov.trace() > 0.0) || linalg::min_symmetric_eigenvalue(cov) <= floor) {
    bad.push_back({"sigma_rank", "Sigma*Sigma' is not positive definite (redundant assets)"});
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return FactorModel(std::move(f));
}

void check_strategy(const FactorModel& model, const Strategy& s) {
  if (s.h.size() != model.m() || s.H.rows() != model.m() || s.H.cols() != model.n()) {
    throw DimensionError("strategy shape (h: " + std::to_string(s.h.size()) + ", H: " + shape(s.H) +
                         ") does not match model with m=" + std::to_string(model.m()) +
                         ", n=" + std::to_string(model.n()));
  }
  if (!s.h.allFinite() || !s.H.allFinite()) throw PreconditionError("strategy has non-finite entries");
}

void check_params(const FactorModel& model, const CriterionParams& p) {
  if (!(p.theta >= 0.0) || !std::isfinite(p.theta)) {
    throw PreconditionError("theta must be finite and nonnegative");
  }
  if (p.gamma.size() != model.n()) {
    throw DimensionError("gamma has length " + std::to_string(p.gamma.size()) + ", expected " +
                         std::to_string(model.n()));
  }
  if (!p.gamma.allFinite()) throw PreconditionError("gamma has non-finite entries");
}

FactorModel make_scalar_model(const ScalarModelParams& p) {
  ModelFields f;
  f.a = Vector::Constant(1, p.a);
  f.A = Matrix::Constant(1, 1, p.A);
  f.B = Matrix::Constant(1, 1, p.B);
  f.Sigma.resize(1, 2);
  f.Sigma << p.sigma, p.eta;
  f.Lambda.resize(1, 2);
  f.Lambda << 0.0, p.lambda;
  return validate_model(std::move(f));
}

ScalarModelParams sp500_fixture_params() {
  return {.a = 0.01993, .A = -0.01177, .B = -0.021, .sigma = 0.044249, .eta = 0.000874,
          .lambda = 0.6329};
}

FactorModel sp500_fixture() { return make_scalar_model(sp500_fixture_params()); }

}  // namespace asymalloc
