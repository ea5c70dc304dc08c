#pragma once

#include <stdexcept>
#include <string>

namespace beamtrain {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

/// Every candidate codeword pair at some layer of a descent was zero.
class DegenerateCodebook : public Error {
 public:
  using Error::Error;
};

/// Malformed config text. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// A well-formed config that violates one of the experiment invariants.
class ConstraintViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace beamtrain
