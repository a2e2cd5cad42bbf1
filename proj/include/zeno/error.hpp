#pragma once

#include <stdexcept>
#include <string>

namespace zeno {

/// Invalid input: parameters outside their domain, malformed configs.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical engine could not deliver a trustworthy result
/// (ill-conditioned matrix function, non-convergent quadrature or inversion).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace zeno
