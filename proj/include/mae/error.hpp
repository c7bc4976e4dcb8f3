#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mae {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Malformed input file. `row()` is the 1-based line number when known, 0 otherwise.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t row = 0) : Error(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class UnsupportedVersionError : public ParseError {
 public:
  using ParseError::ParseError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class RankDeficientError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Raised when a divergence witness cannot be built (the chosen direction does not activate the data).
class InconclusiveWitnessError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace mae
