#pragma once

#include <stdexcept>
#include <string>

namespace iptw {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad files, bad columns, invalid parameter combinations.
class DataError : public Error {
 public:
  using Error::Error;
};

// Model fitting failures: non-convergence, separation, positivity violations.
class FitError : public Error {
 public:
  using Error::Error;
};

// A dataset or resample on which the MSM parameters are not estimable
// (empty arm, arm mean on the boundary of the link domain).
class NonEstimableError : public FitError {
 public:
  using FitError::FitError;
};

// Numeric failures: singular matrices, invalid quantile levels, overflow.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace iptw
