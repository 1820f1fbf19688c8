#pragma once

#include <stdexcept>
#include <string>

namespace pnp {

// Shape or size mismatch between operands.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Invalid parameter value at construction/configuration time.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Operation not defined for this variant (e.g. gradient of an indicator).
class UnsupportedOperation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

// Non-finite values or other numeric failure.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Iterative procedure exhausted its budget; carries the last residual.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_ = 0;
};

// A solver hypothesis check failed and no override was requested.
class HypothesisError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace pnp
