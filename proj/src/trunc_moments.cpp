#include "cglasso/trunc_moments.hpp"

#include "cglasso/normal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace cglasso {

namespace {

[[noreturn]] void throw_degenerate(double prob) {
  std::ostringstream os;
  os << "truncation region has probability " << prob << " below the floor "
     << kRegionProbabilityFloor;
  throw DegenerateRegionError(os.str());
}

// Standardized upper tail Z > a: mass, E[Z | .], Var[Z | .].
struct TailStats {
  double prob;
  double mean;
  double var;
};

TailStats upper_tail(double a) {
  const double prob = a > 8.0 ? std::exp(normal::log_sf(a)) : normal::sf(a);
  if (!(prob >= kRegionProbabilityFloor)) throw_degenerate(prob);
  const double lambda = normal::inverse_mills(a);
  return {prob, lambda, std::max(0.0, 1.0 + a * lambda - lambda * lambda)};
}

// One Gibbs coordinate: conditional N(cm, cs^2) kept on one side of t.
struct CoordinateUpdate {
  double draw;
  double mean;
  double var;
};

CoordinateUpdate coordinate_update(double cm, double cs, Tail tail, double t, double u) {
  const double sign = tail == Tail::Above ? 1.0 : -1.0;
  const double a = sign * (t - cm) / cs;
  const double q = normal::sf(a);
  if (!(q >= kRegionProbabilityFloor)) throw_degenerate(q);
  const double lambda = normal::inverse_mills(a);
  const double z = std::max(a, normal::upper_quantile(u * q));
  return {cm + sign * cs * z, cm + sign * cs * lambda,
          cs * cs * std::max(0.0, 1.0 + a * lambda - lambda * lambda)};
}

TruncMoments from_univariate(const UnivariateMoments& u) {
  TruncMoments out;
  out.m1 = Vector::Constant(1, u.m1);
  out.m2 = Matrix::Constant(1, 1, u.m2);
  out.cov = Matrix::Constant(1, 1, u.var);
  out.prob = u.prob;
  out.m1_se = Vector::Zero(1);
  out.m2_se = Matrix::Zero(1, 1);
  return out;
}

void check_region(const ConditionalGaussian& cond, const TruncRegion& region) {
  if (cond.size() < 1) throw DataError("truncated moments: empty block");
  if (region.size() != cond.size() || static_cast<Index>(region.tail.size()) != cond.size())
    throw DataError("truncated moments: region and conditional law sizes differ");
  for (Index j = 0; j < region.size(); ++j)
    if (!std::isfinite(region.threshold(j)))
      throw DataError("truncated moments: thresholds must be finite");
}

}  // namespace

UnivariateMoments univ_trunc_moments(double mean, double variance, double lo, double hi) {
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw NumericalError("truncated moments: variance must be positive and finite");
  if (!(lo < hi)) throw DataError("truncated moments: empty interval");
  const double s = std::sqrt(variance);
  const double a = (lo - mean) / s;
  const double b = (hi - mean) / s;

  double prob = 1.0;
  double ez = 0.0;
  double ez2 = 1.0;
  double varz = 1.0;
  const bool lo_inf = std::isinf(lo);
  const bool hi_inf = std::isinf(hi);
  if (lo_inf && hi_inf) {
    // untruncated
  } else if (hi_inf) {
    const TailStats t = upper_tail(a);
    prob = t.prob;
    ez = t.mean;
    ez2 = 1.0 + a * t.mean;
    varz = t.var;
  } else if (lo_inf) {
    const TailStats t = upper_tail(-b);
    prob = t.prob;
    ez = -t.mean;
    ez2 = 1.0 - b * t.mean;
    varz = t.var;
  } else {
    if (a >= 0.0) {
      prob = normal::sf(a) - normal::sf(b);
    } else if (b <= 0.0) {
      prob = normal::cdf(b) - normal::cdf(a);
    } else {
      prob = 1.0 - normal::sf(b) - normal::cdf(a);
    }
    if (!(prob >= kRegionProbabilityFloor)) throw_degenerate(prob);
    const double pa = normal::pdf(a);
    const double pb = normal::pdf(b);
    ez = (pa - pb) / prob;
    ez2 = 1.0 + (a * pa - b * pb) / prob;
    varz = std::max(0.0, ez2 - ez * ez);
  }
  UnivariateMoments out;
  out.prob = prob;
  out.m1 = mean + s * ez;
  out.m2 = mean * mean + 2.0 * mean * s * ez + variance * ez2;
  out.var = variance * varz;
  return out;
}

UnivariateMoments univ_trunc_moments(double mean, double variance, Tail tail, double threshold) {
  return tail == Tail::Above ? univ_trunc_moments(mean, variance, threshold, kInf)
                             : univ_trunc_moments(mean, variance, -kInf, threshold);
}

ConditionalGaussian conditional_gaussian(const ModelParams& params, const PatternPartition& part,
                                         const Vector& x_o) {
  const auto& c = part.censored;
  const auto& o = part.observed;
  const Index k = static_cast<Index>(c.size());
  const Index m = static_cast<Index>(o.size());
  if (k == 0) throw DataError("conditional law: no censored components");
  if (x_o.size() != m) throw DataError("conditional law: observed vector has wrong length");

  const Matrix& theta = params.theta();
  const Vector& mu = params.mu();
  ConditionalGaussian out;
  out.precision.resize(k, k);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b) out.precision(a, b) = theta(c[a], c[b]);

  Eigen::LLT<Matrix> llt(out.precision);
  if (llt.info() != Eigen::Success)
    throw NumericalError("conditional law: censored block of the precision matrix is singular");
  out.covariance = llt.solve(Matrix::Identity(k, k));

  // Theta_co (x_o - mu_o)
  Vector shift = Vector::Zero(k);
  for (Index b = 0; b < m; ++b) {
    const double d = x_o(b) - mu(o[b]);
    if (d == 0.0) continue;
    for (Index a = 0; a < k; ++a) shift(a) += theta(c[a], o[b]) * d;
  }
  out.mean.resize(k);
  for (Index a = 0; a < k; ++a) out.mean(a) = mu(c[a]);
  out.mean -= llt.solve(shift);
  return out;
}

TruncRegion row_region(const CensoredDataset& data, Index i, const PatternPartition& part) {
  TruncRegion region;
  const Index k = static_cast<Index>(part.censored.size());
  region.threshold.resize(k);
  region.tail.resize(static_cast<std::size_t>(k));
  for (Index a = 0; a < k; ++a) {
    const Index h = part.censored[static_cast<std::size_t>(a)];
    const bool left = data.status(i, h) == Censor::Left;
    region.tail[static_cast<std::size_t>(a)] = left ? Tail::Below : Tail::Above;
    region.threshold(a) = left ? data.lower(i, h) : data.upper(i, h);
  }
  return region;
}

double sample_trunc_normal(double mean, double sd, Tail tail, double threshold, double u) {
  return coordinate_update(mean, sd, tail, threshold, u).draw;
}

TruncMoments meanfield_trunc_moments(const ConditionalGaussian& cond, const TruncRegion& region) {
  check_region(cond, region);
  const Index k = cond.size();
  TruncMoments out;
  out.m1.resize(k);
  out.cov = Matrix::Zero(k, k);
  out.prob = 1.0;
  for (Index h = 0; h < k; ++h) {
    const auto u = univ_trunc_moments(cond.mean(h), cond.covariance(h, h),
                                      region.tail[static_cast<std::size_t>(h)],
                                      region.threshold(h));
    out.m1(h) = u.m1;
    out.cov(h, h) = u.var;
    out.prob *= u.prob;
  }
  out.m2 = out.m1 * out.m1.transpose();
  out.m2.diagonal() += out.cov.diagonal();
  out.m1_se = Vector::Zero(k);
  out.m2_se = Matrix::Zero(k, k);
  return out;
}

ProbabilityEstimate region_probability(const ConditionalGaussian& cond, const TruncRegion& region,
                                       long draws, RandomStream& rng) {
  check_region(cond, region);
  const Index k = cond.size();
  if (k == 1) {
    const double sd = std::sqrt(cond.covariance(0, 0));
    const double a = (region.threshold(0) - cond.mean(0)) / sd;
    const double prob = region.tail[0] == Tail::Above ? normal::sf(a) : normal::cdf(a);
    return {prob, 0.0};
  }
  if (draws < 2) throw UsageError("region probability: need at least two draws");

  // Flip Below components so every constraint reads Y_j > t_j.
  Vector sign(k);
  for (Index j = 0; j < k; ++j) sign(j) = region.tail[static_cast<std::size_t>(j)] == Tail::Above ? 1.0 : -1.0;
  const Vector t = sign.cwiseProduct(region.threshold - cond.mean);
  const Matrix cov = sign.asDiagonal() * cond.covariance * sign.asDiagonal();
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericalError("region probability: conditional covariance is not positive definite");
  const Matrix L = llt.matrixL();

  double sum = 0.0;
  double sum_sq = 0.0;
  Vector z(k);
  for (long d = 0; d < draws; ++d) {
    double w = 1.0;
    for (Index j = 0; j < k; ++j) {
      double acc = 0.0;
      for (Index l = 0; l < j; ++l) acc += L(j, l) * z(l);
      const double a = (t(j) - acc) / L(j, j);
      const double q = normal::sf(a);
      const double u = rng.uniform();
      w *= q;
      if (q <= 0.0) {
        w = 0.0;
        break;
      }
      z(j) = std::max(a, normal::upper_quantile(u * q));
    }
    sum += w;
    sum_sq += w * w;
  }
  const double n = static_cast<double>(draws);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq / n - mean * mean) * n / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

namespace {

// Connected components of the nonzero pattern of the precision matrix; the
// truncated law factorizes over them because the region is a product set.
std::vector<std::vector<Index>> precision_components(const Matrix& P) {
  const Index k = P.rows();
  std::vector<Index> label(static_cast<std::size_t>(k), -1);
  std::vector<std::vector<Index>> comps;
  for (Index s = 0; s < k; ++s) {
    if (label[static_cast<std::size_t>(s)] >= 0) continue;
    comps.emplace_back();
    auto& comp = comps.back();
    std::vector<Index> stack{s};
    label[static_cast<std::size_t>(s)] = static_cast<Index>(comps.size() - 1);
    while (!stack.empty()) {
      const Index j = stack.back();
      stack.pop_back();
      comp.push_back(j);
      for (Index l = 0; l < k; ++l) {
        if (l != j && P(j, l) != 0.0 && label[static_cast<std::size_t>(l)] < 0) {
          label[static_cast<std::size_t>(l)] = label[static_cast<std::size_t>(s)];
          stack.push_back(l);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
  }
  return comps;
}

TruncMoments gibbs_moments(const ConditionalGaussian& cond, const TruncRegion& region,
                           const GibbsConfig& cfg, RandomStream& rng);

}  // namespace

TruncMoments exact_trunc_mvn_moments(const ConditionalGaussian& cond, const TruncRegion& region,
                                     const GibbsConfig& cfg, RandomStream& rng) {
  check_region(cond, region);
  const Index k = cond.size();
  if (k == 1)
    return from_univariate(univ_trunc_moments(cond.mean(0), cond.covariance(0, 0), region.tail[0],
                                              region.threshold(0)));
  const auto comps = precision_components(cond.precision);
  if (comps.size() == 1) return gibbs_moments(cond, region, cfg, rng);

  TruncMoments out;
  out.m1 = Vector::Zero(k);
  out.cov = Matrix::Zero(k, k);
  out.m1_se = Vector::Zero(k);
  out.prob = 1.0;
  double rel_prob_var = 0.0;
  for (const auto& comp : comps) {
    const Index q = static_cast<Index>(comp.size());
    ConditionalGaussian sub;
    sub.mean.resize(q);
    sub.precision.resize(q, q);
    sub.covariance.resize(q, q);
    TruncRegion sub_region;
    sub_region.threshold.resize(q);
    for (Index a = 0; a < q; ++a) {
      const Index ja = comp[static_cast<std::size_t>(a)];
      sub.mean(a) = cond.mean(ja);
      sub_region.threshold(a) = region.threshold(ja);
      sub_region.tail.push_back(region.tail[static_cast<std::size_t>(ja)]);
      for (Index b = 0; b < q; ++b) {
        sub.precision(a, b) = cond.precision(ja, comp[static_cast<std::size_t>(b)]);
        sub.covariance(a, b) = cond.covariance(ja, comp[static_cast<std::size_t>(b)]);
      }
    }
    const TruncMoments tm = exact_trunc_mvn_moments(sub, sub_region, cfg, rng);
    for (Index a = 0; a < q; ++a) {
      const Index ja = comp[static_cast<std::size_t>(a)];
      out.m1(ja) = tm.m1(a);
      out.m1_se(ja) = tm.m1_se(a);
      for (Index b = 0; b < q; ++b) out.cov(ja, comp[static_cast<std::size_t>(b)]) = tm.cov(a, b);
    }
    out.prob *= tm.prob;
    if (tm.prob > 0.0) rel_prob_var += (tm.prob_se / tm.prob) * (tm.prob_se / tm.prob);
  }
  out.prob_se = out.prob * std::sqrt(rel_prob_var);
  out.m2 = out.cov + out.m1 * out.m1.transpose();
  out.m2_se.resize(k, k);
  for (Index j = 0; j < k; ++j)
    for (Index l = 0; l < k; ++l) {
      const double a = out.m1(j) * out.m1_se(l);
      const double b = out.m1(l) * out.m1_se(j);
      out.m2_se(j, l) = std::sqrt(a * a + b * b);
    }
  return out;
}

namespace {

TruncMoments gibbs_moments(const ConditionalGaussian& cond, const TruncRegion& region,
                           const GibbsConfig& cfg, RandomStream& rng) {
  const Index k = cond.size();
  if (cfg.sweeps < 2 || cfg.batches < 2 || cfg.burn_in < 0)
    throw UsageError("gibbs: sweeps and batches must be at least 2");

  // Work in centred coordinates y = x - cond.mean.
  const Matrix& P = cond.precision;
  const Vector t = region.threshold - cond.mean;
  Vector cond_sd(k);
  for (Index j = 0; j < k; ++j) cond_sd(j) = 1.0 / std::sqrt(P(j, j));

  // Start each coordinate at its marginal truncated mean.
  Vector y(k);
  for (Index j = 0; j < k; ++j)
    y(j) = univ_trunc_moments(0.0, cond.covariance(j, j), region.tail[static_cast<std::size_t>(j)],
                              t(j))
               .m1;

  auto sweep = [&](auto&& record) {
    for (Index j = 0; j < k; ++j) {
      double acc = 0.0;
      for (Index l = 0; l < k; ++l)
        if (l != j) acc += P(j, l) * y(l);
      const double cm = -acc / P(j, j);
      const auto upd = coordinate_update(cm, cond_sd(j), region.tail[static_cast<std::size_t>(j)],
                                         t(j), rng.uniform());
      record(j, upd);
      y(j) = upd.draw;
    }
  };

  for (long s = 0; s < cfg.burn_in; ++s) sweep([](Index, const CoordinateUpdate&) {});

  // Rao-Blackwellized accumulators: E[y_j | y_-j] and Var[y_j | y_-j] at each
  // update of j, and y_l * E[y_j | y_-j] for the cross moments.
  const int B = cfg.batches;
  const long per_batch = std::max<long>(1, cfg.sweeps / B);
  const Vector& mu = cond.mean;
  Vector b_m1(k);
  Matrix b_m2(k, k);
  Vector sum_y = Vector::Zero(k);
  Matrix sum_yy = Matrix::Zero(k, k);
  Vector sumsq_m1 = Vector::Zero(k);
  Matrix sum_x2 = Matrix::Zero(k, k), sumsq_x2 = Matrix::Zero(k, k);

  for (int b = 0; b < B; ++b) {
    b_m1.setZero();
    b_m2.setZero();
    for (long s = 0; s < per_batch; ++s) {
      sweep([&](Index j, const CoordinateUpdate& upd) {
        b_m1(j) += upd.mean;
        b_m2(j, j) += upd.mean * upd.mean + upd.var;
        for (Index l = 0; l < k; ++l)
          if (l != j) b_m2(j, l) += y(l) * upd.mean;
      });
    }
    b_m1 /= static_cast<double>(per_batch);
    b_m2 /= static_cast<double>(per_batch);
    const Matrix yy = 0.5 * (b_m2 + b_m2.transpose());
    const Matrix x2 = yy + mu * b_m1.transpose() + b_m1 * mu.transpose();  // minus mu mu^T
    sum_y += b_m1;
    sumsq_m1 += b_m1.cwiseAbs2();
    sum_yy += yy;
    sum_x2 += x2;
    sumsq_x2 += x2.cwiseAbs2();
  }

  const double nb = static_cast<double>(B);
  const Vector ey = sum_y / nb;
  const Matrix eyy = sum_yy / nb;
  const Matrix ex2 = sum_x2 / nb;

  TruncMoments out;
  out.m1 = mu + ey;
  out.cov = eyy - ey * ey.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  out.m2 = out.cov + out.m1 * out.m1.transpose();
  out.m1_se = ((sumsq_m1 / nb - ey.cwiseAbs2()).cwiseMax(0.0) / (nb - 1.0)).cwiseSqrt();
  out.m2_se = ((sumsq_x2 / nb - ex2.cwiseAbs2()).cwiseMax(0.0) / (nb - 1.0)).cwiseSqrt();

  if (cfg.prob_draws >= 2) {
    const auto pe = region_probability(cond, region, cfg.prob_draws, rng);
    out.prob = pe.prob;
    out.prob_se = pe.se;
  } else {
    out.prob = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace

}  // namespace cglasso
