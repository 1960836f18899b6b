#pragma once

#include <stdexcept>
#include <string>

namespace kgvac {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected argument or malformed input.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to meet its contract.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature could not reach the requested tolerance.
class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double a, double b, double err)
      : NumericalError(what), lo(a), hi(b), estimate(err) {}

  double lo;
  double hi;
  double estimate;
};

}  // namespace kgvac
