#pragma once

#include <stdexcept>
#include <string>

namespace nel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix that must be positive definite failed to factorize.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the documented domain (dimension mismatch, bad prior, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An operation was called on a state that violates its precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Malformed or unusable input data.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace nel
