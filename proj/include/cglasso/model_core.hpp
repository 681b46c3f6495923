#pragma once

#include "cglasso/common.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cglasso {

/// Censoring status of a single entry.
enum class Censor : std::int8_t { Left = -1, Observed = 0, Right = 1 };

using IndicatorMatrix = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Lower and upper detection limits, one per variable. Infinite limits mean
/// the variable cannot be censored on that side.
class CensoringBounds {
 public:
  CensoringBounds() = default;
  /// Throws DataError unless lower.size() == upper.size() and lower < upper
  /// elementwise (NaN rejected).
  CensoringBounds(Vector lower, Vector upper);

  static CensoringBounds unbounded(Index p);
  /// Same lower/upper limit for every variable.
  static CensoringBounds uniform(Index p, double lower, double upper);

  Index size() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  double lower(Index h) const { return lower_(h); }
  double upper(Index h) const { return upper_(h); }

  /// Adds `shift` to every finite limit.
  CensoringBounds shifted(const Vector& shift) const;

 private:
  Vector lower_;
  Vector upper_;
};

/// Per-row index sets: observed, left-censored and right-censored components.
struct PatternPartition {
  std::vector<Index> observed;
  std::vector<Index> left;
  std::vector<Index> right;
  /// left followed by right, each in increasing order.
  std::vector<Index> censored;

  bool fully_observed() const { return censored.empty(); }
};

/// n x p interval-censored sample. Immutable after construction.
///
/// values(i,h) is meaningful only where indicator(i,h) == 0; censored cells
/// hold NaN. Bounds are either one pair of p-vectors or, for per-observation
/// limits, an n x p pair.
class CensoredDataset {
 public:
  CensoredDataset() = default;

  /// Validates all invariants and throws DataError on violation.
  CensoredDataset(Matrix values, IndicatorMatrix indicator, CensoringBounds bounds,
                  std::vector<std::string> names = {});

  /// Per-observation bounds (n x p each).
  CensoredDataset(Matrix values, IndicatorMatrix indicator, Matrix lower, Matrix upper,
                  std::vector<std::string> names = {});

  Index n() const { return values_.rows(); }
  Index p() const { return values_.cols(); }

  const Matrix& values() const { return values_; }
  const IndicatorMatrix& indicator() const { return indicator_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(Index h) const { return names_[static_cast<std::size_t>(h)]; }

  double value(Index i, Index h) const { return values_(i, h); }
  Censor status(Index i, Index h) const { return static_cast<Censor>(indicator_(i, h)); }

  double lower(Index i, Index h) const;
  double upper(Index i, Index h) const;
  /// Threshold of a censored cell: lower limit if left-censored, upper if right-censored.
  double threshold(Index i, Index h) const;

  bool has_per_observation_bounds() const { return row_lower_.has_value(); }
  /// Common bounds. For per-observation datasets these are the column-wise
  /// extreme limits and are informational only.
  const CensoringBounds& bounds() const { return bounds_; }

  Index censored_count() const;
  Index censored_count(Index h) const;
  Index observed_count(Index h) const;

  /// Same pattern with every observed value and every finite limit shifted by `shift`.
  CensoredDataset shifted(const Vector& shift) const;

 private:
  void validate() const;

  Matrix values_;
  IndicatorMatrix indicator_;
  CensoringBounds bounds_;
  std::optional<Matrix> row_lower_;
  std::optional<Matrix> row_upper_;
  std::vector<std::string> names_;
};

/// Mean vector and precision matrix, with the covariance cached.
class ModelParams {
 public:
  ModelParams() = default;

  /// Symmetrizes `theta`, checks positive definiteness (NumericalError
  /// otherwise) and computes sigma = theta^{-1} by Cholesky.
  static ModelParams from_precision(Vector mu, const Matrix& theta);
  /// Trusts the caller that sigma is the inverse of a symmetric PD theta.
  static ModelParams from_parts(Vector mu, Matrix theta, Matrix sigma);

  const Vector& mu() const { return mu_; }
  const Matrix& theta() const { return theta_; }
  const Matrix& sigma() const { return sigma_; }
  Index p() const { return mu_.size(); }

  bool is_diagonal() const;
  /// Number of nonzero off-diagonal entries, both triangles.
  Index offdiag_nonzeros() const;
  double log_det_theta() const;

 private:
  Vector mu_;
  Matrix theta_;
  Matrix sigma_;
};

/// Builds a dataset from raw measurements. NaN cells are missing markers and
/// are censored on the side given by `na_side` (one entry per column; empty
/// means "right if the upper limit is finite, else left"). Values above the
/// upper limit are right-censored, values below the lower limit left-censored,
/// values equal to a limit are observed.
///
/// Throws DataError on dimension mismatch or when a missing marker falls on a
/// side whose limit is infinite.
CensoredDataset encode_censoring(const Matrix& raw, const CensoringBounds& bounds,
                                 const std::vector<Censor>& na_side = {},
                                 std::vector<std::string> names = {});

/// Default censoring side of missing markers for column h.
Censor default_na_side(const CensoringBounds& bounds, Index h);

PatternPartition partition_row(const CensoredDataset& data, Index i);

/// Column means and covariance with denominator n.
Vector column_means(const Matrix& x);
Matrix empirical_covariance(const Matrix& x);

}  // namespace cglasso
