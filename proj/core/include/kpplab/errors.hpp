#pragma once

#include <stdexcept>
#include <string>

namespace kpplab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (e.g. a not in (0,1)).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operation requested for a regime in which it is not defined.
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// Parameter combination for which no prediction is available (beta = 2, eta >= 1/2).
class UnsupportedRegime : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Invalid solver or window configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown or invariant violation during a run.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed or non-finite input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Least-squares fit could not be performed reliably.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Configuration file failed validation. The message lists every problem found.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace kpplab
