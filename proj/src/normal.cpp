#include "cglasso/normal.hpp"
#include "cglasso/random.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <limits>

namespace cglasso::normal {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kTailSwitch = 8.0;

// Q(z)/phi(z) for z > 0 by Lentz's method on the continued fraction
// R(z) = 1/(z + 1/(z + 2/(z + 3/(z + ...)))).
double mills_continued_fraction(double z) {
  constexpr double tiny = 1e-300;
  double f = z;
  double c = z;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    d = z + k * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = z + k / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}
}  // namespace

double pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double sf(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

double log_sf(double z) {
  if (z > kTailSwitch) return log_pdf(z) + std::log(mills_continued_fraction(z));
  if (z < -kTailSwitch) return std::log1p(-cdf(z));
  return std::log(sf(z));
}

double mills_ratio(double z) {
  if (z > kTailSwitch) return mills_continued_fraction(z);
  return sf(z) / pdf(z);
}

double inverse_mills(double z) {
  if (z > kTailSwitch) return 1.0 / mills_continued_fraction(z);
  if (z < -37.0) return 0.0;
  return pdf(z) / sf(z);
}

double quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
}

double upper_quantile(double q) {
  if (q <= 0.0) return std::numeric_limits<double>::infinity();
  if (q >= 1.0) return -std::numeric_limits<double>::infinity();
  return kSqrt2 * boost::math::erfc_inv(2.0 * q);
}

}  // namespace cglasso::normal

namespace cglasso {

double RandomStream::normal() { return normal::quantile(uniform()); }

}  // namespace cglasso
