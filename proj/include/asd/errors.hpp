#pragma once

#include <stdexcept>
#include <string>

namespace asd {

/// Root of every error thrown by this project.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument value (empty batch, out-of-range response, non-scalar loss).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Configuration violates its invariants.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Tensor or raster extents do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (files, annotations).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Geometry too small for the requested computation (e.g. k-NN with one point).
class DegenerateError : public DataError {
 public:
  using DataError::DataError;
};

/// Operation called in the wrong state (missing gradients, double backward).
class StateError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf produced somewhere in a forward or backward pass.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace asd
