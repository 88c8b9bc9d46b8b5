#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rae {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Logarithm requested for a rotation whose angle is too close to pi.
class AngleNearPi : public Error {
 public:
  using Error::Error;
};

class NonPositiveRange : public Error {
 public:
  using Error::Error;
};

class ElevationOutOfRange : public Error {
 public:
  using Error::Error;
};

// Frame or perturbation-point tags disagree at a compounding boundary.
class TagMismatch : public Error {
 public:
  using Error::Error;
};

class SingularCovariance : public Error {
 public:
  using Error::Error;
};

class NonPositiveDt : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class TimestampOutOfRange : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Carries the 1-based row (or line) number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : Error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace rae
