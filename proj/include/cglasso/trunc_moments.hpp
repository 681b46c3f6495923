#pragma once

#include "cglasso/common.hpp"
#include "cglasso/model_core.hpp"
#include "cglasso/random.hpp"

#include <cstdint>
#include <vector>

namespace cglasso {

/// Region probabilities below this are reported as degenerate.
inline constexpr double kRegionProbabilityFloor = 1e-300;

/// Which tail of a component the truncation keeps.
enum class Tail : std::int8_t { Below = -1, Above = 1 };

/// Product region: component j lies below (Tail::Below) or above
/// (Tail::Above) threshold(j). Thresholds are finite.
struct TruncRegion {
  std::vector<Tail> tail;
  Vector threshold;

  Index size() const { return threshold.size(); }
};

struct UnivariateMoments {
  double m1 = 0.0;   ///< E[X | X in region]
  double m2 = 0.0;   ///< E[X^2 | X in region]
  double var = 0.0;  ///< Var[X | X in region], computed without cancellation
  double prob = 1.0; ///< P(X in region)
};

/// Moments of N(mean, variance) restricted to (lo, hi); either limit may be
/// infinite. Throws DegenerateRegionError if the mass is below the floor.
UnivariateMoments univ_trunc_moments(double mean, double variance, double lo, double hi);

/// One-sided convenience overload.
UnivariateMoments univ_trunc_moments(double mean, double variance, Tail tail, double threshold);

/// Law of the censored block given the observed block.
struct ConditionalGaussian {
  Vector mean;
  Matrix precision;
  Matrix covariance;

  Index size() const { return mean.size(); }
};

/// Conditional law of X_c given X_o = x_o, where c = part.censored and
/// x_o is ordered as part.observed. Throws NumericalError if Theta_cc is not
/// numerically positive definite.
ConditionalGaussian conditional_gaussian(const ModelParams& params, const PatternPartition& part,
                                         const Vector& x_o);

/// Truncation region of row i, ordered as part.censored.
TruncRegion row_region(const CensoredDataset& data, Index i, const PatternPartition& part);

struct TruncMoments {
  Vector m1;   ///< first moments
  Matrix m2;   ///< non-central second moments
  Matrix cov;  ///< m2 - m1 m1^T, accumulated in centred coordinates
  double prob = 1.0;
  /// Monte Carlo standard errors (zero for closed-form results).
  Vector m1_se;
  Matrix m2_se;
  double prob_se = 0.0;
};

struct GibbsConfig {
  long sweeps = 100000;
  long burn_in = 1000;
  /// Batches used for batch-means standard errors.
  int batches = 50;
  /// Draws for the region-probability (GHK) estimate reported alongside.
  long prob_draws = 2000;
};

/// Truncated moments of the conditional law over the region. A single
/// component is handled in closed form; larger blocks use a Gibbs sampler
/// whose one-dimensional updates draw by inversion, with Rao-Blackwellized
/// estimates of the moments.
TruncMoments exact_trunc_mvn_moments(const ConditionalGaussian& cond, const TruncRegion& region,
                                     const GibbsConfig& cfg, RandomStream& rng);

/// Mean-field moments: each component is truncated marginally with variance
/// cov(h,h); cross moments are products of first moments. `prob` is the
/// product of the marginal masses.
TruncMoments meanfield_trunc_moments(const ConditionalGaussian& cond, const TruncRegion& region);

struct ProbabilityEstimate {
  double prob = 0.0;
  double se = 0.0;
};

/// P(X in region) for X ~ cond by the GHK sequential-conditioning
/// simulator. Exact (se = 0) for a single component.
ProbabilityEstimate region_probability(const ConditionalGaussian& cond, const TruncRegion& region,
                                       long draws, RandomStream& rng);

/// Draw from N(mean, sd^2) restricted to one tail, by inversion of the
/// uniform u in (0, 1).
double sample_trunc_normal(double mean, double sd, Tail tail, double threshold, double u);

}  // namespace cglasso
