#include "cglasso/model_core.hpp"

#include <cmath>
#include <sstream>

namespace cglasso {

namespace {

std::vector<std::string> default_names(Index p) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(p));
  for (Index h = 0; h < p; ++h) names.push_back("X" + std::to_string(h + 1));
  return names;
}

}  // namespace

CensoringBounds::CensoringBounds(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size())
    throw DataError("bounds: lower and upper have different lengths");
  for (Index h = 0; h < lower_.size(); ++h) {
    if (std::isnan(lower_(h)) || std::isnan(upper_(h)))
      throw DataError("bounds: NaN limit for variable " + std::to_string(h + 1));
    if (!(lower_(h) < upper_(h)))
      throw DataError("bounds: lower limit must be strictly below upper limit for variable " +
                      std::to_string(h + 1));
  }
}

CensoringBounds CensoringBounds::unbounded(Index p) {
  return {Vector::Constant(p, -kInf), Vector::Constant(p, kInf)};
}

CensoringBounds CensoringBounds::uniform(Index p, double lower, double upper) {
  return {Vector::Constant(p, lower), Vector::Constant(p, upper)};
}

CensoringBounds CensoringBounds::shifted(const Vector& shift) const {
  return {lower_ + shift, upper_ + shift};  // inf + finite stays inf
}

CensoredDataset::CensoredDataset(Matrix values, IndicatorMatrix indicator, CensoringBounds bounds,
                                 std::vector<std::string> names)
    : values_(std::move(values)),
      indicator_(std::move(indicator)),
      bounds_(std::move(bounds)),
      names_(std::move(names)) {
  if (names_.empty()) names_ = default_names(values_.cols());
  validate();
}

CensoredDataset::CensoredDataset(Matrix values, IndicatorMatrix indicator, Matrix lower,
                                 Matrix upper, std::vector<std::string> names)
    : values_(std::move(values)), indicator_(std::move(indicator)), names_(std::move(names)) {
  if (names_.empty()) names_ = default_names(values_.cols());
  if (lower.rows() != values_.rows() || lower.cols() != values_.cols() ||
      upper.rows() != values_.rows() || upper.cols() != values_.cols())
    throw DataError("dataset: per-observation bounds must be n x p");
  for (Index i = 0; i < lower.rows(); ++i)
    for (Index h = 0; h < lower.cols(); ++h)
      if (std::isnan(lower(i, h)) || std::isnan(upper(i, h)) || !(lower(i, h) < upper(i, h)))
        throw DataError("dataset: invalid per-observation bounds at row " + std::to_string(i + 1) +
                        ", column " + std::to_string(h + 1));
  bounds_ = CensoringBounds(lower.colwise().minCoeff().transpose(),
                            upper.colwise().maxCoeff().transpose());
  row_lower_ = std::move(lower);
  row_upper_ = std::move(upper);
  validate();
}

void CensoredDataset::validate() const {
  const Index n = values_.rows();
  const Index p = values_.cols();
  if (n < 1 || p < 1) throw DataError("dataset: need at least one row and one column");
  if (indicator_.rows() != n || indicator_.cols() != p)
    throw DataError("dataset: indicator shape does not match values");
  if (bounds_.size() != p) throw DataError("dataset: bounds length does not match column count");
  if (static_cast<Index>(names_.size()) != p)
    throw DataError("dataset: number of names does not match column count");
  for (Index i = 0; i < n; ++i) {
    for (Index h = 0; h < p; ++h) {
      const int r = indicator_(i, h);
      if (r < -1 || r > 1)
        throw DataError("dataset: indicator entries must be -1, 0 or +1");
      if (r == 0) {
        const double x = values_(i, h);
        if (!std::isfinite(x)) {
          std::ostringstream os;
          os << "dataset: non-finite observed value at row " << i + 1 << ", column '"
             << names_[static_cast<std::size_t>(h)] << "'";
          throw DataError(os.str());
        }
        if (x < lower(i, h) || x > upper(i, h)) {
          std::ostringstream os;
          os << "dataset: observed value outside detection limits at row " << i + 1
             << ", column '" << names_[static_cast<std::size_t>(h)] << "'";
          throw DataError(os.str());
        }
      } else if (!std::isfinite(threshold(i, h))) {
        std::ostringstream os;
        os << "dataset: censored cell with infinite limit at row " << i + 1 << ", column '"
           << names_[static_cast<std::size_t>(h)] << "'";
        throw DataError(os.str());
      }
    }
  }
}

double CensoredDataset::lower(Index i, Index h) const {
  return row_lower_ ? (*row_lower_)(i, h) : bounds_.lower(h);
}

double CensoredDataset::upper(Index i, Index h) const {
  return row_upper_ ? (*row_upper_)(i, h) : bounds_.upper(h);
}

double CensoredDataset::threshold(Index i, Index h) const {
  return indicator_(i, h) < 0 ? lower(i, h) : upper(i, h);
}

Index CensoredDataset::censored_count() const {
  return (indicator_.array() != 0).count();
}

Index CensoredDataset::censored_count(Index h) const {
  return (indicator_.col(h).array() != 0).count();
}

Index CensoredDataset::observed_count(Index h) const {
  return (indicator_.col(h).array() == 0).count();
}

CensoredDataset CensoredDataset::shifted(const Vector& shift) const {
  Matrix v = values_;
  v.rowwise() += shift.transpose();
  if (row_lower_) {
    Matrix lo = *row_lower_;
    Matrix hi = *row_upper_;
    lo.rowwise() += shift.transpose();
    hi.rowwise() += shift.transpose();
    return {std::move(v), indicator_, std::move(lo), std::move(hi), names_};
  }
  return {std::move(v), indicator_, bounds_.shifted(shift), names_};
}

ModelParams ModelParams::from_precision(Vector mu, const Matrix& theta) {
  if (theta.rows() != theta.cols() || theta.rows() != mu.size())
    throw DataError("model: mu and theta dimensions disagree");
  ModelParams m;
  m.mu_ = std::move(mu);
  m.theta_ = 0.5 * (theta + theta.transpose());
  Eigen::LLT<Matrix> llt(m.theta_);
  if (llt.info() != Eigen::Success)
    throw NumericalError("model: precision matrix is not positive definite");
  m.sigma_ = llt.solve(Matrix::Identity(m.theta_.rows(), m.theta_.cols()));
  m.sigma_ = 0.5 * (m.sigma_ + m.sigma_.transpose());
  return m;
}

ModelParams ModelParams::from_parts(Vector mu, Matrix theta, Matrix sigma) {
  ModelParams m;
  m.mu_ = std::move(mu);
  m.theta_ = std::move(theta);
  m.sigma_ = std::move(sigma);
  return m;
}

bool ModelParams::is_diagonal() const { return offdiag_nonzeros() == 0; }

Index ModelParams::offdiag_nonzeros() const {
  Index count = 0;
  for (Index k = 0; k < theta_.cols(); ++k)
    for (Index h = 0; h < theta_.rows(); ++h)
      if (h != k && theta_(h, k) != 0.0) ++count;
  return count;
}

double ModelParams::log_det_theta() const {
  Eigen::LLT<Matrix> llt(theta_);
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Censor default_na_side(const CensoringBounds& bounds, Index h) {
  return std::isfinite(bounds.upper(h)) || !std::isfinite(bounds.lower(h)) ? Censor::Right
                                                                            : Censor::Left;
}

CensoredDataset encode_censoring(const Matrix& raw, const CensoringBounds& bounds,
                                 const std::vector<Censor>& na_side,
                                 std::vector<std::string> names) {
  const Index n = raw.rows();
  const Index p = raw.cols();
  if (bounds.size() != p)
    throw DataError("encode: bounds length " + std::to_string(bounds.size()) +
                    " does not match column count " + std::to_string(p));
  if (!na_side.empty() && static_cast<Index>(na_side.size()) != p)
    throw DataError("encode: missing-marker side list does not match column count");
  if (!names.empty() && static_cast<Index>(names.size()) != p)
    throw DataError("encode: name list does not match column count");

  Matrix values(n, p);
  IndicatorMatrix indicator(n, p);
  for (Index h = 0; h < p; ++h) {
    const Censor side = na_side.empty() ? default_na_side(bounds, h)
                                        : na_side[static_cast<std::size_t>(h)];
    const double lo = bounds.lower(h);
    const double hi = bounds.upper(h);
    for (Index i = 0; i < n; ++i) {
      const double x = raw(i, h);
      Censor r = Censor::Observed;
      if (std::isnan(x)) {
        if (side == Censor::Observed)
          throw DataError("encode: missing marker in a column declared fully observed");
        const double limit = side == Censor::Right ? hi : lo;
        if (!std::isfinite(limit)) {
          std::ostringstream os;
          os << "encode: missing marker at row " << i + 1 << ", column "
             << (names.empty() ? std::to_string(h + 1) : "'" + names[static_cast<std::size_t>(h)] + "'")
             << " but the " << (side == Censor::Right ? "upper" : "lower")
             << " limit is infinite";
          throw DataError(os.str());
        }
        r = side;
      } else if (x > hi) {
        r = Censor::Right;
      } else if (x < lo) {
        r = Censor::Left;
      }
      indicator(i, h) = static_cast<std::int8_t>(r);
      values(i, h) = r == Censor::Observed ? x : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return {std::move(values), std::move(indicator), bounds, std::move(names)};
}

PatternPartition partition_row(const CensoredDataset& data, Index i) {
  if (i < 0 || i >= data.n())
    throw DataError("partition: row index " + std::to_string(i) + " out of range");
  PatternPartition part;
  for (Index h = 0; h < data.p(); ++h) {
    switch (data.status(i, h)) {
      case Censor::Observed: part.observed.push_back(h); break;
      case Censor::Left: part.left.push_back(h); break;
      case Censor::Right: part.right.push_back(h); break;
    }
  }
  part.censored = part.left;
  part.censored.insert(part.censored.end(), part.right.begin(), part.right.end());
  return part;
}

Vector column_means(const Matrix& x) { return x.colwise().mean().transpose(); }

Matrix empirical_covariance(const Matrix& x) {
  const Matrix centered = x.rowwise() - x.colwise().mean();
  Matrix s = (centered.transpose() * centered) / static_cast<double>(x.rows());
  return 0.5 * (s + s.transpose());
}

}  // namespace cglasso
