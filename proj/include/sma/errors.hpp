#pragma once

#include <stdexcept>
#include <string>

namespace sma {

/// Base class of all errors raised by the material kernel and the driver.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a function (e.g. a volume fraction at 0 or 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An input violates a documented precondition (e.g. a non-orthogonal rotation).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Broken internal invariant; indicates a bug rather than bad input.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace sma
