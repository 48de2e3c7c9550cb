#pragma once

#include "asymalloc/model.hpp"
#include "asymalloc/timeseries.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace asymalloc::mc {

enum class FactorScheme {
  exact,  // exact Gaussian OU transition, jointly drawn with the Brownian increment
  euler,
};

struct SimConfig {
  double dt = 0.1;          // months
  double horizon = 1.0e4;   // months
  long paths = 10000;
  std::uint64_t seed = 1;
  FactorScheme scheme = FactorScheme::exact;
  bool antithetic = true;
  bool stationaryStart = true;  // X(0) ~ N(0, Delta); otherwise X(0) = 0
  int threads = 1;
  bool keepPaths = false;       // retain per-path u(T), X(T)
};

void check_config(const SimConfig& config);

struct Estimate {
  double value = 0.0;
  double stderr = 0.0;
};

struct PathStats {
  double horizon = 0.0;
  long paths = 0;
  Estimate meanU;               // E u(T)
  Estimate varU;                // Var u(T)
  std::vector<Estimate> covUX;  // E u(T) X_j(T)
  std::vector<double> finalU;   // when keepPaths
  Matrix finalX;                // paths x n, when keepPaths
};

/// Euler-Maruyama on log-wealth
///   du = (h+HX)'((a+AX)dt + Sigma dW) - 1/2 (h+HX)' Sigma Sigma' (h+HX) dt
/// jointly with the factor process. Path i's random numbers depend only on
/// (seed, i, step), so results do not depend on the thread count.
PathStats simulate(const FactorModel& model, const Strategy& strategy, const SimConfig& config);

// Slopes of the long-run moments fitted by least squares over a grid of horizons.
struct AsymptoticFit {
  std::vector<double> horizons;
  Estimate K;        // slope of E u
  Estimate varRate;  // slope of Var u
  Matrix R, Rse;     // slope of E u X X'
  Matrix S, Sse;     // intercept of E u X X'
  Vector P, Pse;     // E u X at the last horizon
};

/// Runs one simulation recording every path at each horizon in `horizons`
/// (increasing, at least 4, each a multiple of dt) and regresses the moment
/// estimates on T. Standard errors account for the shared paths.
AsymptoticFit estimate_asymptotics(const FactorModel& model, const Strategy& strategy,
                                   SimConfig config, const std::vector<double>& horizons);

/// Monthly (dt = 1) data from the model: the factor follows the chosen scheme
/// and each month's excess return is a + A x_{t-1} + Sigma dW_t, in the CSV
/// conventions of the calibration module (returns decimal, factors percent).
TimeSeriesData simulate_discrete(const FactorModel& model, long months, std::uint64_t seed,
                                 FactorScheme scheme = FactorScheme::exact,
                                 const std::string& startMonth = "1970-01");

/// CSV `path,T,u,x_1..x_n` of retained final states.
std::string paths_to_csv(const PathStats& stats);

}  // namespace asymalloc::mc
