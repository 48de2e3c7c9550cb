#pragma once

#include "asymalloc/linalg.hpp"

#include <functional>

namespace asymalloc {

struct NelderMeadOptions {
  double initialStep = 0.1;   // simplex edge, scaled by (1 + |x_i|)
  double xTolerance = 1e-10;  // simplex diameter, relative to 1 + |x_best|
  double fTolerance = 1e-15;  // spread of function values, relative to 1 + |f_best|
  int maxIterations = 20000;
};

struct NelderMeadResult {
  Vector x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Minimizes f from x0 with the standard reflection/expansion/contraction/shrink
/// coefficients (1, 2, 1/2, 1/2). Deterministic.
NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                             const NelderMeadOptions& options = {});

}  // namespace asymalloc
