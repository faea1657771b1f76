#pragma once

#include <stdexcept>
#include <string>

namespace ved {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent configuration (unknown schedule kind, K > n, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Shape or length mismatch between arguments.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Missing or malformed files on disk.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Too few samples for a statistic (batch norm with one row, N <= 1, ...).
class StatisticsError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, failed factorizations, divergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The flow problem has no Dirichlet anchor and is singular.
class WellPosednessError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Eigen/Cholesky decomposition failed or the matrix is not PSD.
class DecompositionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace ved
