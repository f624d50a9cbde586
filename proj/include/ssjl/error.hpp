#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssjl {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Dimension mismatch or index out of range.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or otherwise unusable numeric data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A vector that must have unit norm does not.
class NormalizationError : public Error {
 public:
  using Error::Error;
};

/// A brute-force enumeration would exceed its configuration budget.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Malformed external input (vector files, matrix files). Carries the 1-based
/// line number when the input is line oriented, 0 otherwise.
class InputError : public Error {
 public:
  InputError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ssjl
