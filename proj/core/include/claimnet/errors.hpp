#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace claimnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data. Carries the 1-based line (or
/// record) number when the error can be attributed to one.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A covariate token that cannot be interpreted for its variable.
class EncodingError : public Error {
 public:
  using Error::Error;
};

/// Overflow, divergence, or another failure of a numerical routine.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace claimnet
