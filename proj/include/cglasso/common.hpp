#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace cglasso {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr const char* kVersion = "0.1.0";

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (bad dimensions, invalid bounds, unusable columns).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: singular or indefinite matrices, non-convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The censoring region of one observation has (numerically) zero probability.
class DegenerateRegionError : public NumericalError {
 public:
  DegenerateRegionError(const std::string& what, Index row = -1)
      : NumericalError(what), row_(row) {}
  Index row() const noexcept { return row_; }

 private:
  Index row_;
};

/// Bad command-line usage or configuration.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace cglasso
