#pragma once

#include <stdexcept>
#include <string>

namespace symflow {

// Validation failures (bad shapes, out-of-range parameters) throw
// std::invalid_argument. Failures of the numerics themselves use this type,
// so callers can tell the two apart (the CLI maps them to distinct exit codes).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace symflow
