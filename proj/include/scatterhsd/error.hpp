#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scatterhsd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by caller-supplied data (empty cloud, m > n, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Tensor shapes incompatible for the requested op.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A forward op produced NaN or Inf.
class NumericsError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries the 1-based line where parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace scatterhsd
