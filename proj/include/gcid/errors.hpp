#pragma once

#include <stdexcept>
#include <string>

namespace gcid {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A configuration object is malformed; the message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A moment that the operation needs is infinite or undefined for the law.
class UnsupportedMomentError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double estimate, double residual)
      : Error(what + " (estimate " + std::to_string(estimate) + ", residual " +
              std::to_string(residual) + ")"),
        estimate_(estimate),
        residual_(residual) {}

  double estimate() const noexcept { return estimate_; }
  double residual() const noexcept { return residual_; }

 private:
  double estimate_;
  double residual_;
};

/// A rectangle weight came out genuinely negative, i.e. H is not concave.
class ConcavityError : public Error {
 public:
  ConcavityError(std::size_t i, std::size_t j, double value)
      : Error("weight a(" + std::to_string(i) + "," + std::to_string(j) +
              ") = " + std::to_string(value) +
              " is negative; the correlation structure is not concave"),
        i_(i),
        j_(j),
        value_(value) {}

  /// One-based row index of the offending entry.
  std::size_t row() const noexcept { return i_; }
  /// One-based column index of the offending entry.
  std::size_t col() const noexcept { return j_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t i_;
  std::size_t j_;
  double value_;
};

/// Simulation window cannot be bounded for the requested service law.
class WindowError : public Error {
 public:
  using Error::Error;
};

}  // namespace gcid
