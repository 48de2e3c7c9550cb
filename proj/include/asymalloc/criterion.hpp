#pragma once

#include "asymalloc/moments.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace asymalloc {

/// W = K - (theta/4) varRate + Gamma . P
///
/// The variance penalty is theta/4, not theta/2.
double evaluate(const FactorModel& model, const Strategy& strategy, const CriterionParams& params);
double evaluate(const MomentEngine& engine, const Strategy& strategy, const CriterionParams& params);

// Strategies are searched as flat vectors x = [h; H in row-major order].
Vector pack_strategy(const Strategy& s);
Strategy unpack_strategy(const Vector& x, int m, int n);

struct OptimizerConfig {
  // Search box for the global scan. Empty means [-3, 3] in every coordinate.
  Vector lower;
  Vector upper;
  int gridPoints = 61;           // per coordinate, full-grid scans
  int samplePoints = 4096;       // Latin hypercube size for larger problems
  int maxFullGridDimension = 4;  // beyond this (or above maxGridEvaluations) use LHS
  long maxGridEvaluations = 1'000'000;
  int localRestarts = 5;         // Nelder-Mead runs from the best scan points
  double simplexTolerance = 1e-10;
  int maxIterations = 20000;
  std::uint64_t seed = 20020101;
};

/// Throws PreconditionError when the config violates its invariants.
void check_config(const OptimizerConfig& config, int dimension);

struct LocalSearch {
  Vector start;
  Vector x;
  double W = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct OptimizeResult {
  Strategy strategy;
  double W = 0.0;
  double gradientNorm = 0.0;
  bool stationary = false;  // first-order check at the optimum passed
  double bestScanValue = 0.0;
  std::vector<LocalSearch> restarts;
  std::vector<std::string> warnings;
};

/// Maximizes W over (h, H): a coarse scan of the configured box (full grid or
/// Latin hypercube) followed by Nelder-Mead from the best scan points and from
/// any extra starting points. Throws UnboundedError when W grows without bound
/// along a ray leaving the box.
OptimizeResult optimize(const FactorModel& model, const CriterionParams& params,
                        const OptimizerConfig& config, const std::vector<Vector>& extraStarts = {});

class UnboundedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Central-difference gradient with step 1e-5 (1 + |x_i|).
Vector finite_difference_gradient(const MomentEngine& engine, const CriterionParams& params,
                                  const Vector& x);

struct SweepPoint {
  double parameter = 0.0;
  std::optional<OptimizeResult> optimum;  // empty when the point failed
  std::string error;
  // H*(0,0) / h*(0): relative sensitivity of the rule to the first factor.
  double ratio = 0.0;
  bool ok() const { return optimum.has_value() && optimum->stationary; }
};

struct SweepResult {
  std::vector<SweepPoint> points;
};

/// Optimizes at each theta in order, warm-starting from the previous optimum.
SweepResult sweep_theta(const FactorModel& model, const std::vector<double>& thetas,
                        const Vector& gamma, const OptimizerConfig& config);

/// Gamma = g * direction for each g in gammas (direction has length n).
SweepResult sweep_gamma(const FactorModel& model, double theta, const std::vector<double>& gammas,
                        const Vector& direction, const OptimizerConfig& config);

}  // namespace asymalloc
