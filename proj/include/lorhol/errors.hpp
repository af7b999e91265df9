#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lorhol {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression or configuration text.
class ParseError : public Error {
 public:
  enum class Kind { Syntax, UnknownIdentifier, IndexOutOfRange, Config };

  ParseError(Kind kind, std::size_t position, const std::string& what)
      : Error(what + " (at offset " + std::to_string(position) + ")"),
        kind_(kind),
        position_(position) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t position() const noexcept { return position_; }

 private:
  Kind kind_;
  std::size_t position_;
};

/// Evaluation outside the domain of a primitive (division by zero, sqrt of a
/// negative number, a point with the wrong number of coordinates).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A mathematical precondition failed: non-Lorentzian signature, Walker
/// constraints violated, wrong dimension for a structure check.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: singular metric, step-size underflow.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace lorhol
