#include "cglasso/em_engine.hpp"

#include "cglasso/normal.hpp"
#include "cglasso/parallel.hpp"
#include "cglasso/random.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace cglasso {

std::string to_string(EStepMode mode) {
  switch (mode) {
    case EStepMode::Exact: return "exact";
    case EStepMode::MeanField: return "meanfield";
    case EStepMode::MissingAtRandom: return "mar";
  }
  return "unknown";
}

EStepMode parse_estep_mode(const std::string& text) {
  if (text == "exact") return EStepMode::Exact;
  if (text == "meanfield" || text == "mean-field" || text == "approx") return EStepMode::MeanField;
  if (text == "mar") return EStepMode::MissingAtRandom;
  throw UsageError("unknown E-step mode '" + text + "' (expected exact, meanfield or mar)");
}

namespace {

// Contribution of one row to the completed statistics.
struct RowCompletion {
  std::vector<Index> censored;
  Vector m1;   // completed censored entries
  Matrix cov;  // conditional covariance of the censored block (added to S)
  bool gibbs = false;
};

RowCompletion complete_row(const CensoredDataset& data, const ModelParams& params, Index i,
                           const EStepConfig& cfg) {
  RowCompletion out;
  PatternPartition part = partition_row(data, i);
  if (part.fully_observed()) return out;

  Vector x_o(static_cast<Index>(part.observed.size()));
  for (Index b = 0; b < x_o.size(); ++b) x_o(b) = data.value(i, part.observed[static_cast<std::size_t>(b)]);
  const ConditionalGaussian cond = conditional_gaussian(params, part, x_o);
  const TruncRegion region = row_region(data, i, part);
  out.censored = std::move(part.censored);

  switch (cfg.mode) {
    case EStepMode::MissingAtRandom:
      out.m1 = cond.mean;
      out.cov = cond.covariance;
      break;
    case EStepMode::MeanField: {
      TruncMoments tm = meanfield_trunc_moments(cond, region);
      out.m1 = std::move(tm.m1);
      out.cov = std::move(tm.cov);
      break;
    }
    case EStepMode::Exact: {
      RandomStream rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
      GibbsConfig gibbs = cfg.gibbs;
      gibbs.prob_draws = 0;  // mass is not needed here
      TruncMoments tm = exact_trunc_mvn_moments(cond, region, gibbs, rng);
      out.m1 = std::move(tm.m1);
      out.cov = std::move(tm.cov);
      out.gibbs = cond.size() > 1;
      break;
    }
  }
  return out;
}

}  // namespace

Completion complete_data(const CensoredDataset& data, const ModelParams& params,
                         const EStepConfig& cfg) {
  const Index n = data.n();
  const Index p = data.p();
  if (params.p() != p) throw DataError("e-step: parameter dimension does not match data");

  std::vector<RowCompletion> rows(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), cfg.threads, [&](std::size_t i) {
    try {
      rows[i] = complete_row(data, params, static_cast<Index>(i), cfg);
    } catch (const DegenerateRegionError& e) {
      std::ostringstream os;
      os << "row " << i + 1 << ": " << e.what();
      throw DegenerateRegionError(os.str(), static_cast<Index>(i));
    }
  });

  Completion out;
  out.completed = data.values();
  Matrix correction = Matrix::Zero(p, p);
  for (Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    const Index k = static_cast<Index>(r.censored.size());
    for (Index a = 0; a < k; ++a) {
      out.completed(i, r.censored[static_cast<std::size_t>(a)]) = r.m1(a);
      for (Index b = 0; b < k; ++b)
        correction(r.censored[static_cast<std::size_t>(a)], r.censored[static_cast<std::size_t>(b)]) +=
            r.cov(a, b);
    }
    if (r.gibbs) ++out.gibbs_rows;
  }

  SuffStats& st = out.stats;
  st.xbar = column_means(out.completed);
  const Matrix centered = out.completed.rowwise() - st.xbar.transpose();
  st.S = (centered.transpose() * centered + correction) / static_cast<double>(n);
  st.S = 0.5 * (st.S + st.S.transpose());

  // Completed matrices can be singular or, with Monte Carlo cross moments,
  // slightly indefinite; lift the spectrum to 1e-8 when it dips below 1e-10.
  Eigen::LLT<Matrix> llt(st.S - 1e-10 * Matrix::Identity(p, p));
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(st.S, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    if (lmin < 1e-10) {
      st.psd_shift = 1e-8 - lmin;
      st.S.diagonal().array() += st.psd_shift;
    }
  }
  return out;
}

SuffStats e_step(const CensoredDataset& data, const ModelParams& params, const EStepConfig& cfg) {
  return complete_data(data, params, cfg).stats;
}

MStepResult m_step(const SuffStats& stats, double rho, const GlassoSolution* warm,
                   const GlassoConfig& cfg) {
  MStepResult out;
  out.glasso = glasso_fit(stats.S, rho, warm, cfg);
  out.params = ModelParams::from_parts(stats.xbar, out.glasso.theta, out.glasso.sigma);
  return out;
}

FitResult fit_em(const CensoredDataset& data, double rho, const ModelParams& init,
                 const EmConfig& cfg) {
  if (!(rho >= 0.0)) throw DataError("fit: rho must be >= 0");
  if (init.p() != data.p()) throw DataError("fit: initial parameters have the wrong dimension");

  FitResult fit;
  fit.rho = rho;
  ModelParams params = init;
  GlassoSolution warm;
  warm.theta = init.theta();
  warm.sigma = init.sigma();
  SuffStats stats = e_step(data, params, cfg.estep);
  if (stats.psd_shift > 0.0) ++fit.psd_repairs;
  const bool constant_estep = data.censored_count() == 0;

  // Inexact M-steps: the glasso tolerance follows the size of the last EM
  // step and reaches cfg.glasso.tol only near the fixed point.
  GlassoConfig gcfg = cfg.glasso;
  double step_tol = constant_estep ? cfg.glasso.tol : std::max(cfg.glasso.tol, 1e-6);

  // One EM map application from `from`, whose E-step statistics are `st`.
  // Leaves the new point in params/warm/stats and reports whether the
  // stopping rule holds there.
  double last_step = 0.0;
  std::vector<double> steps;
  auto em_step = [&](const ModelParams& from, const SuffStats& st, GlassoSolution& w) {
    gcfg.tol = step_tol;
    MStepResult m = m_step(st, rho, &w, gcfg);
    fit.q_value = glasso_objective(m.params.theta(), st.S, rho);
    fit.q_history.push_back(fit.q_value);
    ++fit.em_iterations;
    const double dmu = (m.params.mu() - from.mu()).cwiseAbs().maxCoeff();
    const double dtheta = (m.params.theta() - from.theta()).cwiseAbs().maxCoeff();
    const double mu_scale = 1.0 + m.params.mu().cwiseAbs().maxCoeff();
    const double theta_scale = 1.0 + m.params.theta().cwiseAbs().maxCoeff();
    params = std::move(m.params);
    w = std::move(m.glasso);
    if (constant_estep) return true;
    stats = e_step(data, params, cfg.estep);
    if (stats.psd_shift > 0.0) ++fit.psd_repairs;
    const double kkt = kkt_residual(params.theta(), params.sigma(), stats.S, rho);
    const double kkt_limit =
        std::min(cfg.kkt_tol * stats.S.diagonal().cwiseAbs().mean(), cfg.kkt_abs_tol);
    last_step = std::max(dmu / mu_scale, dtheta / theta_scale);
    steps.push_back(last_step);
    step_tol = std::clamp(1e-2 * last_step, cfg.glasso.tol, 1e-6);
    return dmu <= cfg.tol * mu_scale && dtheta <= cfg.tol * theta_scale && kkt <= kkt_limit;
  };

  // Scaled stacking of (mu, theta) for the extrapolation step lengths.
  auto stacked = [](const ModelParams& a) {
    const double ms = 1.0 + a.mu().cwiseAbs().maxCoeff();
    const double ts = 1.0 + a.theta().cwiseAbs().maxCoeff();
    Vector v(a.mu().size() + a.theta().size());
    v << a.mu() / ms, a.theta().reshaped() / ts;
    return v;
  };

  const bool accelerate = cfg.accelerate && !constant_estep;
  // After a rejected extrapolation, plain steps before the next attempt.
  // Doubles per consecutive rejection.
  int rejections = 0;
  int plain_left = 0;
  // Geometric rate of the step size between two windows 50 M-steps apart,
  // using window minima since extrapolation makes single steps noisy.
  std::size_t next_check = 100;
  auto stalled = [&] {
    const std::size_t t = steps.size();
    if (!cfg.stop_on_stall || t < next_check) return false;
    next_check = t + 25;
    auto window_min = [&](std::size_t end) {
      return *std::min_element(steps.begin() + static_cast<std::ptrdiff_t>(end - 25),
                               steps.begin() + static_cast<std::ptrdiff_t>(end));
    };
    const double now = window_min(t);
    const double before = window_min(t - 50);
    if (now <= cfg.tol) return false;
    if (now >= before) return true;
    const double rate = std::pow(now / before, 1.0 / 50.0);
    const double needed = std::log(cfg.tol / now) / std::log(rate);
    return static_cast<double>(t) + needed > 2.0 * cfg.max_iter;
  };

  while (fit.em_iterations < cfg.max_iter) {
    if (stalled()) {
      fit.stalled = true;
      break;
    }
    if (!accelerate || plain_left > 0 || cfg.max_iter - fit.em_iterations < 3) {
      if (plain_left > 0) --plain_left;
      const ModelParams from = params;
      if (em_step(from, stats, warm)) {
        fit.converged = true;
        break;
      }
      continue;
    }
    // SQUAREM: two plain steps, an extrapolated point, and one stabilizing
    // step from it. The result is accepted only if its step is no larger
    // than the first plain step; otherwise the second plain step is kept.
    const ModelParams p0 = params;
    if (em_step(p0, stats, warm)) {
      fit.converged = true;
      break;
    }
    const ModelParams p1 = params;
    const double first_step = last_step;
    if (em_step(p1, stats, warm)) {
      fit.converged = true;
      break;
    }
    const ModelParams p2 = params;
    const SuffStats s2 = stats;
    const GlassoSolution w2 = warm;
    const double tol2 = step_tol;

    const Vector r = stacked(p1) - stacked(p0);
    const Vector v = stacked(p2) - stacked(p1) - r;
    const double vn = v.norm();
    if (!(vn > 0.0)) continue;
    double alpha = -r.norm() / vn;
    if (alpha > -1.0) continue;  // plain EM step length; p2 already holds it

    std::optional<ModelParams> extrap;
    for (int tries = 0; tries < 6 && alpha < -1.0; ++tries, alpha = 0.5 * (alpha - 1.0)) {
      const Vector mu = p0.mu() - 2.0 * alpha * (p1.mu() - p0.mu()) +
                        alpha * alpha * (p2.mu() - 2.0 * p1.mu() + p0.mu());
      Matrix th = p0.theta() - 2.0 * alpha * (p1.theta() - p0.theta()) +
                  alpha * alpha * (p2.theta() - 2.0 * p1.theta() + p0.theta());
      try {
        extrap = ModelParams::from_precision(mu, th);
        break;
      } catch (const NumericalError&) {
      }
    }
    if (!extrap) continue;
    bool converged = false;
    bool accepted = false;
    try {
      stats = e_step(data, *extrap, cfg.estep);
      params = *extrap;
      converged = em_step(*extrap, stats, warm);
      accepted = converged || last_step <= first_step;
    } catch (const NumericalError&) {
      accepted = false;
    }
    if (converged) {
      fit.converged = true;
      break;
    }
    if (accepted) {
      rejections = 0;
    } else {
      params = p2;
      stats = s2;
      warm = w2;
      step_tol = tol2;
      plain_left = 1 << std::min(rejections, 6);
      ++rejections;
    }
  }

  fit.params = std::move(params);
  fit.suffstats = std::move(stats);
  fit.kkt_residual =
      kkt_residual(fit.params.theta(), fit.params.sigma(), fit.suffstats.S, rho);
  fit.fixed_point_residual = (fit.suffstats.xbar - fit.params.mu()).cwiseAbs().maxCoeff();
  return fit;
}

LogLikelihood observed_loglik(const CensoredDataset& data, const ModelParams& params,
                              const LogLikConfig& cfg) {
  const Index n = data.n();
  if (params.p() != data.p()) throw DataError("loglik: parameter dimension does not match data");
  struct RowLL {
    double value = 0.0;
    double var = 0.0;
  };
  std::vector<RowLL> rows(static_cast<std::size_t>(n));

  parallel_for(static_cast<std::size_t>(n), cfg.threads, [&](std::size_t ii) {
    const auto i = static_cast<Index>(ii);
    const PatternPartition part = partition_row(data, i);
    const auto& o = part.observed;
    const Index m = static_cast<Index>(o.size());
    RowLL r;
    Vector x_o(m);
    for (Index b = 0; b < m; ++b) x_o(b) = data.value(i, o[static_cast<std::size_t>(b)]);
    if (m > 0) {
      Matrix sigma_oo(m, m);
      Vector d(m);
      for (Index a = 0; a < m; ++a) {
        d(a) = x_o(a) - params.mu()(o[static_cast<std::size_t>(a)]);
        for (Index b = 0; b < m; ++b)
          sigma_oo(a, b) = params.sigma()(o[static_cast<std::size_t>(a)], o[static_cast<std::size_t>(b)]);
      }
      Eigen::LLT<Matrix> llt(sigma_oo);
      if (llt.info() != Eigen::Success)
        throw NumericalError("loglik: observed block of sigma is not positive definite");
      const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
      const Vector z = llt.matrixL().solve(d);
      r.value = -0.5 * (static_cast<double>(m) * 2.0 * normal::kLogSqrt2Pi + logdet + z.squaredNorm());
    }
    if (!part.fully_observed()) {
      const ConditionalGaussian cond = conditional_gaussian(params, part, x_o);
      const TruncRegion region = row_region(data, i, part);
      double log_prob;
      if (cond.size() == 1) {
        const double sd = std::sqrt(cond.covariance(0, 0));
        const double a = (region.threshold(0) - cond.mean(0)) / sd;
        log_prob = region.tail[0] == Tail::Above ? normal::log_sf(a) : normal::log_sf(-a);
      } else {
        RandomStream rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
        const ProbabilityEstimate pe = region_probability(cond, region, cfg.draws, rng);
        if (!(pe.prob > 0.0)) {
          throw DegenerateRegionError("row " + std::to_string(i + 1) +
                                          ": censoring region has zero estimated probability",
                                      i);
        }
        log_prob = std::log(pe.prob);
        r.var = (pe.se / pe.prob) * (pe.se / pe.prob);
      }
      if (!std::isfinite(log_prob))
        throw DegenerateRegionError("row " + std::to_string(i + 1) + ": degenerate censoring region", i);
      r.value += log_prob;
    }
    rows[ii] = r;
  });

  LogLikelihood out;
  double var = 0.0;
  for (const auto& r : rows) {
    out.value += r.value;
    var += r.var;
  }
  out.se = std::sqrt(var);
  return out;
}

double penalized_objective(const CensoredDataset& data, const ModelParams& params, double rho,
                           const LogLikConfig& cfg) {
  const Matrix& t = params.theta();
  const double l1 = t.cwiseAbs().sum() - t.diagonal().cwiseAbs().sum();
  return observed_loglik(data, params, cfg).value / static_cast<double>(data.n()) - 0.5 * rho * l1;
}

}  // namespace cglasso
