#pragma once

#include <stdexcept>
#include <string>

namespace cvbell {

/// A precondition on an argument was violated.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical evaluation produced a non-finite value.
class NumericalDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The request would exceed the memory guard for dense state materialization.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver failed to converge. Carries the last residual seen.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// An internal consistency assumption (e.g. monotonicity of a root bracket) broke.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cvbell
