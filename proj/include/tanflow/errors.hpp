#pragma once

#include <stdexcept>
#include <string>

namespace tanflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A real part left the declared domain of a map.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Division, log or sqrt evaluated at a pole or branch point.
class SingularEval : public Error {
 public:
  using Error::Error;
};

/// Fiber-product operands sit over different base points.
class BaseMismatch : public Error {
 public:
  using Error::Error;
};

/// The bracket difference left the kernel of the tangent projection.
class KernelViolation : public Error {
 public:
  using Error::Error;
};

class DegreeUnderflow : public Error {
 public:
  using Error::Error;
};

class UnknownSpace : public Error {
 public:
  using Error::Error;
};

/// A corpus plot is not a plot of the space it was declared on.
class CorpusViolation : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// Corpus or expression text could not be parsed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line_(line),
        column_(column) {}

  [[nodiscard]] int line() const noexcept { return line_; }
  [[nodiscard]] int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

class UndefinedVariable : public ParseError {
 public:
  using ParseError::ParseError;
};

class ArityMismatch : public ParseError {
 public:
  using ParseError::ParseError;
};

}  // namespace tanflow
