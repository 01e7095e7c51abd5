#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cnls {

// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input that the caller could have checked (argument outside its domain,
// inadmissible parameter combination, malformed configuration).
class InputError : public Error {
 public:
  using Error::Error;
};

// A computation that started from valid input but could not finish
// (quadrature failure, singular transform, blow-up).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DomainError : public InputError {
 public:
  using InputError::InputError;
};

class AdmissibilityError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : InputError("at byte " + std::to_string(offset) + ": " + message), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class EvalError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A trajectory or field left the representable range.
class OverflowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A set of coefficients or candidate functions fails the governing equations.
class InconsistencyError : public NumericalError {
 public:
  InconsistencyError(const std::string& message, double residual)
      : NumericalError(message + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// A transform or closed form hits a pole; [t_lo, t_hi] brackets the crossing.
class SingularityError : public NumericalError {
 public:
  SingularityError(const std::string& message, double t_lo, double t_hi)
      : NumericalError(message + " in [" + std::to_string(t_lo) + ", " + std::to_string(t_hi) + "]"),
        t_lo_(t_lo),
        t_hi_(t_hi) {}

  double t_lo() const noexcept { return t_lo_; }
  double t_hi() const noexcept { return t_hi_; }

 private:
  double t_lo_;
  double t_hi_;
};

}  // namespace cnls
