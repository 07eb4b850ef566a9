#pragma once

#include <stdexcept>
#include <string>

namespace levyopt {

/// Base of every exception thrown by the core. The C API maps each subclass
/// onto one status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a scalar function (x <= 0 for f, etc).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed model or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature could not reach the requested tolerance.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// An integral against the jump measure is infinite (tail test failed).
class DivergentIntegralError : public Error {
 public:
  using Error::Error;
};

/// Y(y) = (f')^{-1}(f'(1) + <beta, e^y - 1>) does not exist at y.
class YUndefinedError : public Error {
 public:
  YUndefinedError(const std::string& what, double y) : Error(what), y_(y) {}
  double y() const noexcept { return y_; }

 private:
  double y_;
};

enum class SolverFailure { NoSolution, Positivity, Integrability };

class SolverError : public Error {
 public:
  SolverError(SolverFailure kind, const std::string& what)
      : Error(what), kind_(kind) {}
  SolverFailure kind() const noexcept { return kind_; }

 private:
  SolverFailure kind_;
};

/// Raised by the orchestrator when a verification assertion fails.
class VerificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace levyopt
