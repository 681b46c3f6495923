#include "cglasso/path_runner.hpp"

#include <algorithm>
#include <cmath>

namespace cglasso {

UnivariateFit univariate_observed_fit(const CensoredDataset& data, Index h) {
  const Index n = data.n();
  double sum = 0.0;
  Index n_obs = 0;
  for (Index i = 0; i < n; ++i) {
    if (data.status(i, h) != Censor::Observed) continue;
    sum += data.value(i, h);
    ++n_obs;
  }
  if (n_obs < 2)
    throw DataError("column '" + data.name(h) + "' has fewer than two observed values");
  UnivariateFit fit;
  fit.mu = sum / static_cast<double>(n_obs);
  double ss = 0.0;
  for (Index i = 0; i < n; ++i)
    if (data.status(i, h) == Censor::Observed)
      ss += (data.value(i, h) - fit.mu) * (data.value(i, h) - fit.mu);
  fit.sigma2 = ss / static_cast<double>(n_obs);
  if (!(fit.sigma2 > 1e-14 * (1.0 + fit.mu * fit.mu)))
    throw DataError("column '" + data.name(h) + "' has zero variance among observed values");
  return fit;
}

UnivariateFit univariate_censored_mle(const CensoredDataset& data, Index h, double tol,
                                      int max_iter) {
  const Index n = data.n();
  UnivariateFit fit = univariate_observed_fit(data, h);
  if (data.observed_count(h) == n) return fit;

  for (int it = 1; it <= max_iter; ++it) {
    double s1 = 0.0;
    std::vector<UnivariateMoments> mom;
    mom.reserve(static_cast<std::size_t>(data.censored_count(h)));
    for (Index i = 0; i < n; ++i) {
      const Censor r = data.status(i, h);
      if (r == Censor::Observed) {
        s1 += data.value(i, h);
      } else {
        mom.push_back(univ_trunc_moments(fit.mu, fit.sigma2,
                                         r == Censor::Left ? Tail::Below : Tail::Above,
                                         data.threshold(i, h)));
        s1 += mom.back().m1;
      }
    }
    const double mu = s1 / static_cast<double>(n);
    double s2 = 0.0;
    std::size_t c = 0;
    for (Index i = 0; i < n; ++i) {
      if (data.status(i, h) == Censor::Observed) {
        const double d = data.value(i, h) - mu;
        s2 += d * d;
      } else {
        const auto& m = mom[c++];
        s2 += m.var + (m.m1 - mu) * (m.m1 - mu);
      }
    }
    const double sigma2 = s2 / static_cast<double>(n);
    const bool done = std::abs(mu - fit.mu) <= tol * (1.0 + std::abs(mu)) &&
                      std::abs(sigma2 - fit.sigma2) <= tol * (1.0 + sigma2);
    fit.mu = mu;
    fit.sigma2 = sigma2;
    fit.iterations = it;
    if (done) break;
  }
  return fit;
}

RhoMax rho_max(const CensoredDataset& data, const EStepConfig& cfg) {
  const Index p = data.p();
  Vector mu(p);
  Vector prec(p);
  const bool mar = cfg.mode == EStepMode::MissingAtRandom;
  for (Index h = 0; h < p; ++h) {
    // Under the missing-at-random model the per-column MLE uses the observed values only.
    const UnivariateFit u = mar ? univariate_observed_fit(data, h) : univariate_censored_mle(data, h);
    mu(h) = u.mu;
    prec(h) = 1.0 / u.sigma2;
  }
  RhoMax out;
  out.params0 = ModelParams::from_parts(mu, Matrix(prec.asDiagonal()),
                                        Matrix(prec.cwiseInverse().asDiagonal()));
  // With a diagonal precision the censored coordinates are independent, so
  // the mean-field completion is exact.
  EStepConfig mf = cfg;
  mf.mode = mar ? EStepMode::MissingAtRandom : EStepMode::MeanField;
  out.stats0 = e_step(data, out.params0, mf);
  out.rho_max = max_offdiag_abs(out.stats0.S);
  return out;
}

std::string to_string(Spacing s) { return s == Spacing::Linear ? "linear" : "log"; }

Spacing parse_spacing(const std::string& text) {
  if (text == "linear") return Spacing::Linear;
  if (text == "log") return Spacing::Log;
  throw UsageError("unknown spacing '" + text + "' (expected linear or log)");
}

std::vector<double> rho_grid(double rho_max, double rho_min, int K, Spacing spacing) {
  if (K < 1) throw UsageError("grid: K must be at least 1");
  if (K == 1) return {rho_max};
  if (!(rho_min >= 0.0) || !(rho_min < rho_max))
    throw UsageError("grid: need 0 <= rho_min < rho_max (rho_max = " + std::to_string(rho_max) +
                     ", rho_min = " + std::to_string(rho_min) + ")");
  if (spacing == Spacing::Log && !(rho_min > 0.0))
    throw UsageError("grid: log spacing needs rho_min > 0");
  std::vector<double> rhos(static_cast<std::size_t>(K));
  const double steps = static_cast<double>(K - 1);
  for (int k = 0; k < K; ++k) {
    const double f = static_cast<double>(k) / steps;
    rhos[static_cast<std::size_t>(k)] =
        spacing == Spacing::Linear ? rho_max - f * (rho_max - rho_min)
                                   : rho_max * std::pow(rho_min / rho_max, f);
  }
  rhos.front() = rho_max;
  rhos.back() = rho_min;
  return rhos;
}

PathResult fit_path(const CensoredDataset& data, const PathConfig& cfg) {
  const RhoMax rm = rho_max(data, cfg.em.estep);
  PathResult out;
  out.rho_max = rm.rho_max;
  double rmin;
  if (cfg.rho_min_ratio)
    rmin = *cfg.rho_min_ratio * rm.rho_max;
  else
    rmin = cfg.rho_min.value_or(1e-3);
  if (cfg.K > 1 && !(rmin < rm.rho_max))
    throw UsageError("path: rho_min (" + std::to_string(rmin) + ") must be below rho_max (" +
                     std::to_string(rm.rho_max) + ")");
  out.rhos = rho_grid(rm.rho_max, rmin, cfg.K, cfg.spacing);

  ModelParams init = rm.params0;
  for (double rho : out.rhos) {
    try {
      FitResult f = fit_em(data, rho, init, cfg.em);
      init = f.params;
      out.fits.push_back(std::move(f));
    } catch (const NumericalError& e) {
      out.complete = false;
      out.error = "rho = " + std::to_string(rho) + ": " + e.what();
      break;
    }
  }
  return out;
}

std::vector<double> bic_exact(const PathResult& path, const CensoredDataset& data,
                              const LogLikConfig& cfg) {
  const double n = static_cast<double>(data.n());
  const double p = static_cast<double>(data.p());
  std::vector<double> out;
  out.reserve(path.fits.size());
  for (const auto& f : path.fits) {
    const double ll = observed_loglik(data, f.params, cfg).value;
    const double a = static_cast<double>(f.params.offdiag_nonzeros());
    out.push_back(-2.0 * ll / n + (2.0 * p + a) * std::log(n) / n);
  }
  return out;
}

double bic_approx_value(const ModelParams& params, const Matrix& S, Index n) {
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(params.p());
  const double a = static_cast<double>(params.offdiag_nonzeros());
  return -params.log_det_theta() + (params.theta().cwiseProduct(S)).sum() +
         (2.0 * p + a) * std::log(nn) / nn;
}

std::vector<double> bic_approx(const PathResult& path, Index n) {
  std::vector<double> out;
  out.reserve(path.fits.size());
  for (const auto& f : path.fits) out.push_back(bic_approx_value(f.params, f.suffstats.S, n));
  return out;
}

std::size_t select_index(const std::vector<double>& criterion) {
  if (criterion.empty()) throw UsageError("select: empty criterion");
  std::size_t best = 0;
  for (std::size_t k = 1; k < criterion.size(); ++k)
    if (criterion[k] < criterion[best]) best = k;
  return best;
}

std::vector<GlassoSolution> glasso_path(const Matrix& S, const std::vector<double>& rhos,
                                        const GlassoConfig& cfg) {
  std::vector<GlassoSolution> out;
  out.reserve(rhos.size());
  for (double rho : rhos) out.push_back(glasso_fit(S, rho, out.empty() ? nullptr : &out.back(), cfg));
  return out;
}

}  // namespace cglasso
