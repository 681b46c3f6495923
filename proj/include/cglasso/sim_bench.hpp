#pragma once

#include "cglasso/path_runner.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace cglasso {

/// Shape of the random sparse precision matrices.
struct PrecisionShape {
  double magnitude_lo = 0.3;
  double magnitude_hi = 0.7;
  /// Smallest eigenvalue after the diagonal lift.
  double min_eigenvalue = 0.3;
};

/// Symmetric PD matrix with Bernoulli(edge_prob) off-diagonal support on the
/// upper triangle, magnitudes uniform on [lo, hi] with random sign, and the
/// diagonal lifted to |lambda_min(B)| + min_eigenvalue.
Matrix gen_sparse_precision(Index p, double edge_prob, std::uint64_t seed,
                            const PrecisionShape& shape = {});

/// Mean giving right-censoring probability `prob` at threshold u for a
/// Gaussian with standard deviation sigma.
double mu_for_censor_prob(double u, double sigma, double prob);

/// How the means of the variables outside the censored set are chosen.
enum class Background {
  Calibrated,  ///< censoring probability `background_prob` at u
  Uniform,     ///< uniform on [mu_lo, mu_hi]
};

struct SimSpec {
  Index p = 10;
  Index n = 100;
  double edge_prob = 0.1;
  /// Number of variables in the censored set D.
  Index H = 0;
  /// Right-censoring threshold (common to all variables).
  double u = 40.0;
  /// Censoring probability of each variable in D.
  double censor_prob = 0.25;
  Background background = Background::Calibrated;
  double background_prob = 1e-11;
  double mu_lo = 10.0;
  double mu_hi = 35.0;
  PrecisionShape shape;
  std::uint64_t seed = 1;

  /// Throws UsageError on an invalid spec.
  void validate() const;
};

struct Truth {
  Vector mu;
  Matrix theta;
  /// Off-diagonal support of theta (diagonal is zero).
  Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> adjacency;
  std::vector<Index> censored_set;
  std::uint64_t seed = 0;
};

struct SimSample {
  CensoredDataset data;
  Truth truth;
  /// Latent, uncensored draws.
  Matrix latent;
};

/// Draws mu and the set D from the settings, then n rows from N(mu, theta^{-1})
/// through the Cholesky factor of sigma; values above u are right-censored.
SimSample gen_censored_sample(const SimSpec& spec, const Matrix& theta);

/// gen_sparse_precision followed by gen_censored_sample, all from spec.seed.
SimSample simulate(const SimSpec& spec);

/// Estimates along a path, in the common form used by the metrics.
struct MethodPath {
  std::string method;
  std::vector<double> rhos;
  std::vector<Vector> mu;
  std::vector<Matrix> theta;
  /// Data with censored cells imputed by the method (at the selected rho).
  Matrix imputed;
  bool complete = true;
  std::string error;
  /// Largest stationarity residual over the converged fits (NaN if none).
  double max_kkt = std::numeric_limits<double>::quiet_NaN();
  /// Largest max_h |xbar_h - mu_h| / (1 + max|mu|) over the converged EM fits
  /// (NaN for methods without an E-step).
  double max_fixed_point = std::numeric_limits<double>::quiet_NaN();
  /// Fits that hit the iteration or sweep cap.
  int unconverged = 0;
};

struct PathOptions {
  int K = 30;
  double rho_min = 1e-3;
  Spacing spacing = Spacing::Linear;
  EmConfig em;
};

/// cglasso path, in the E-step mode set in opts.em.
MethodPath cglasso_method(const CensoredDataset& data, const PathOptions& opts);

/// Graphical lasso on the covariance of the data with censored cells set to
/// their detection limit. Throws DataError when a column becomes constant.
MethodPath baseline_lod_glasso(const CensoredDataset& data, const PathOptions& opts);

/// Penalized EM that treats censored cells as missing at random.
MethodPath baseline_mar_em(const CensoredDataset& data, const PathOptions& opts);

struct PathMetrics {
  std::vector<double> mse_mu;
  std::vector<double> mse_theta;
  std::vector<double> tpr;
  std::vector<double> fpr;
  double min_mse_mu = 0.0;
  double min_mse_theta = 0.0;
  double auc = 0.0;
};

/// True and false positive rates of an estimate against an adjacency (upper
/// triangle, diagonal excluded). A rate with an empty denominator is 0.
std::pair<double, double> edge_rates(const Matrix& theta,
                                     const Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>& adjacency);

/// Trapezoid area under the (fpr, tpr) points plus (0, 0), sorted by fpr.
double path_auc(const std::vector<double>& fpr, const std::vector<double>& tpr);

/// Squared-norm errors, edge rates per rho, their minima and the path AUC.
/// mse_mu is empty when the method reports no means.
PathMetrics metrics(const Truth& truth, const MethodPath& path);

}  // namespace cglasso
