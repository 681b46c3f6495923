#pragma once

#include "cglasso/em_engine.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cglasso {

struct UnivariateFit {
  double mu = 0.0;
  double sigma2 = 0.0;
  int iterations = 0;
};

/// Censored-Gaussian (Tobit) maximum likelihood for column h, by EM on the
/// single variable. Throws DataError naming the column when fewer than two
/// values are observed or the observed values have zero variance.
UnivariateFit univariate_censored_mle(const CensoredDataset& data, Index h, double tol = 1e-13,
                                      int max_iter = 200000);

/// Mean and variance (denominator = count) of the observed values of column h.
UnivariateFit univariate_observed_fit(const CensoredDataset& data, Index h);

struct RhoMax {
  double rho_max = 0.0;
  /// Diagonal model of the per-column censored MLEs.
  ModelParams params0;
  SuffStats stats0;
};

/// Largest penalty of interest and its (diagonal) solution. In
/// missing-at-random mode the diagonal model uses observed moments instead.
RhoMax rho_max(const CensoredDataset& data, const EStepConfig& cfg = {});

enum class Spacing { Linear, Log };
std::string to_string(Spacing s);
Spacing parse_spacing(const std::string& text);

/// K values from rho_max down to rho_min, strictly decreasing.
std::vector<double> rho_grid(double rho_max, double rho_min, int K, Spacing spacing);

struct PathConfig {
  int K = 30;
  /// Absolute smallest rho; when unset, rho_min_ratio * rho_max is used.
  std::optional<double> rho_min = 1e-3;
  std::optional<double> rho_min_ratio;
  Spacing spacing = Spacing::Linear;
  EmConfig em;
};

struct PathResult {
  std::vector<double> rhos;
  std::vector<FitResult> fits;
  double rho_max = 0.0;
  /// False when a fit failed; fits then holds the completed prefix.
  bool complete = true;
  std::string error;
};

/// Warm-started path of fits over the rho grid, starting from the diagonal
/// rho_max solution.
PathResult fit_path(const CensoredDataset& data, const PathConfig& cfg = {});

/// -(2/n) loglik + (2p + a) log(n) / n per path point, with a the count of
/// nonzero off-diagonal entries (both triangles).
std::vector<double> bic_exact(const PathResult& path, const CensoredDataset& data,
                              const LogLikConfig& cfg = {});

/// -log det Theta + tr(Theta S) + (2p + a) log(n) / n from the stored E-step statistics.
std::vector<double> bic_approx(const PathResult& path, Index n);

/// The same criterion for a single fit.
double bic_approx_value(const ModelParams& params, const Matrix& S, Index n);

/// Index of the minimum; ties go to the smaller index (larger rho).
std::size_t select_index(const std::vector<double>& criterion);

/// Warm-started graphical lasso over the grid on a fixed covariance.
std::vector<GlassoSolution> glasso_path(const Matrix& S, const std::vector<double>& rhos,
                                        const GlassoConfig& cfg = {});

}  // namespace cglasso
