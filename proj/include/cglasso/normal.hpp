#pragma once

// Standard normal density, distribution and tail helpers with care taken in
// the far tails.

namespace cglasso::normal {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double pdf(double z);
double log_pdf(double z);
/// P(Z <= z).
double cdf(double z);
/// P(Z > z), accurate for large z.
double sf(double z);
/// log P(Z > z); finite far beyond the underflow point of sf.
double log_sf(double z);
/// Mills ratio Q(z)/phi(z). Continued fraction for z > 8.
double mills_ratio(double z);
/// Inverse Mills ratio phi(z)/Q(z) = E[Z | Z > z].
double inverse_mills(double z);
/// Phi^{-1}(p), p in (0, 1).
double quantile(double p);
/// Q^{-1}(q) = -Phi^{-1}(q), accurate for tiny q.
double upper_quantile(double q);

}  // namespace cglasso::normal
