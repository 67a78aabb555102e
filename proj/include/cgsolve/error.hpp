#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cgsolve {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class NonFiniteError : public Error {
public:
  using Error::Error;
};

// d^T A d fell at or below the breakdown threshold: operator is not SPD or
// the iteration collapsed numerically.
class BreakdownError : public Error {
public:
  using Error::Error;
};

class InvalidState : public Error {
public:
  using Error::Error;
};

class SingularMatrix : public Error {
public:
  using Error::Error;
};

class UnsupportedFormat : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

// Parse failures always carry the 1-based line number of the offending line.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

}  // namespace cgsolve
