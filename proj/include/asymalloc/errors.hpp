#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace asymalloc {

// Inconsistent matrix/vector shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented precondition does not hold (e.g. unstable drift matrix).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Floating-point or convergence failure inside a numerical routine.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unusable input data (CSV, JSON, time series).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model fields violate one or more FactorModel invariants.
class ValidationError : public std::invalid_argument {
 public:
  struct Violation {
    std::string invariant;  // e.g. "stability", "dimension", "finite", "sigma_rank"
    std::string detail;
  };

  explicit ValidationError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const noexcept { return violations_; }
  bool has(const std::string& invariant) const noexcept;

 private:
  std::vector<Violation> violations_;
};

}  // namespace asymalloc
