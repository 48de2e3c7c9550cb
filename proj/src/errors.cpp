#include "asymalloc/errors.hpp"

#include <algorithm>

namespace asymalloc {

namespace {

std::string join_violations(const std::vector<ValidationError::Violation>& violations) {
  std::string msg = "invalid factor model:";
  for (const auto& v : violations) {
    msg += " [" + v.invariant + "] " + v.detail + ";";
  }
  return msg;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::invalid_argument(join_violations(violations)), violations_(std::move(violations)) {}

bool ValidationError::has(const std::string& invariant) const noexcept {
  return std::any_of(violations_.begin(), violations_.end(),
                     [&](const Violation& v) { return v.invariant == invariant; });
}

}  // namespace asymalloc
