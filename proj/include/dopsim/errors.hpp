#pragma once

#include <stdexcept>
#include <string>

namespace dopsim {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violates a physical or structural invariant (e.g. |M| > 1).
class InvalidState : public Error {
 public:
  using Error::Error;
};

/// DOP requested for a zero-intensity beam.
class UndefinedDop : public Error {
 public:
  using Error::Error;
};

/// Direction requested for a zero-length Poincare vector or axis.
class UndefinedDirection : public Error {
 public:
  using Error::Error;
};

/// Scenario configuration could not be parsed or validated. `field` names the
/// offending JSON path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A computation produced a non-finite or otherwise unusable result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace dopsim
