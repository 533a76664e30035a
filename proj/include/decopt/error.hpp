#pragma once

#include <stdexcept>
#include <string>

namespace decopt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A size argument is zero, too small, or two operands disagree in shape.
class InvalidDimension : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An object does not satisfy the structural invariants of its type.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// The largest two eigenvalues of the data covariance coincide.
class DegenerateEigengap : public Error {
 public:
  using Error::Error;
};

/// The operation needs closed-form data the instance does not carry.
class UnsupportedInstance : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, long line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  long line() const { return line_; }

 private:
  long line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace decopt
