#pragma once

#include <stdexcept>
#include <string>

namespace wfi {

// Precondition or input-validation failure. Maps to CLI exit code 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Quadrature non-convergence, persistent grid escape and similar. Maps to
// CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace detail
}  // namespace wfi
