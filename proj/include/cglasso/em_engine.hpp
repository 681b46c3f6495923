#pragma once

#include "cglasso/common.hpp"
#include "cglasso/glasso.hpp"
#include "cglasso/model_core.hpp"
#include "cglasso/trunc_moments.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cglasso {

/// How censored entries are completed in the E-step.
enum class EStepMode {
  Exact,             ///< full truncated moments (Gibbs for two or more censored entries)
  MeanField,         ///< truncated marginals, cross moments as products
  MissingAtRandom,   ///< untruncated conditional moments (baseline, ignores the region)
};

std::string to_string(EStepMode mode);
/// "exact", "meanfield" (or "mean-field"), "mar". Throws UsageError.
EStepMode parse_estep_mode(const std::string& text);

struct EStepConfig {
  EStepMode mode = EStepMode::MeanField;
  GibbsConfig gibbs;
  /// Master seed; row i of every E-step uses the stream derive_seed(seed, i),
  /// so repeated E-steps reuse the same uniforms.
  std::uint64_t seed = 20180101;
  int threads = 1;
};

/// Completed sufficient statistics: xbar and S = sum_i x_{i,hk}/n - xbar xbar^T.
struct SuffStats {
  Vector xbar;
  Matrix S;
  /// Shift added to the diagonal by the PSD repair (0 if none).
  double psd_shift = 0.0;
};

/// Full E-step output, including the completed (imputed) data matrix.
struct Completion {
  SuffStats stats;
  Matrix completed;  ///< observed values, censored cells replaced by conditional first moments
  Index gibbs_rows = 0;
};

SuffStats e_step(const CensoredDataset& data, const ModelParams& params, const EStepConfig& cfg);
Completion complete_data(const CensoredDataset& data, const ModelParams& params,
                         const EStepConfig& cfg);

/// mu = xbar; theta from the graphical lasso on S warm-started at `warm`.
struct MStepResult {
  ModelParams params;
  GlassoSolution glasso;
};
MStepResult m_step(const SuffStats& stats, double rho, const GlassoSolution* warm,
                   const GlassoConfig& cfg = {});

struct EmConfig {
  EStepConfig estep;
  GlassoConfig glasso;
  /// Stop when max|d mu| <= tol (1 + max|mu|), max|d theta| <= tol (1 + max|theta|)
  /// and the stationarity residual against the fresh E-step statistics is at
  /// most min(kkt_tol * mean(diag S), kkt_abs_tol).
  double tol = 1e-5;
  double kkt_tol = 5e-5;
  double kkt_abs_tol = 5e-5;
  int max_iter = 500;
  /// SQUAREM extrapolation between EM steps. Every M-step counts toward max_iter.
  bool accelerate = true;
  /// Give up early, unconverged, when the step sizes show tol cannot be
  /// reached within twice max_iter. Checked every 25 M-steps from the 100th.
  bool stop_on_stall = true;
};

struct FitResult {
  ModelParams params;
  double rho = 0.0;
  int em_iterations = 0;
  bool converged = false;
  /// log det Theta - tr(Theta S) - rho sum_{h != k}|theta_hk| with S from the last E-step
  /// preceding the final M-step.
  double q_value = 0.0;
  /// Stationarity residual of the graphical-lasso part, evaluated with S at the final iterate.
  double kkt_residual = 0.0;
  /// max_h |xbar_h(mu, Theta) - mu_h| at the final iterate.
  double fixed_point_residual = 0.0;
  /// E-step statistics at the final iterate.
  SuffStats suffstats;
  /// Q-value after each M-step.
  std::vector<double> q_history;
  int psd_repairs = 0;
  /// Stopped by the stall rule rather than the iteration cap.
  bool stalled = false;
};

/// Penalized EM for the censored graphical lasso at one rho.
FitResult fit_em(const CensoredDataset& data, double rho, const ModelParams& init,
                 const EmConfig& cfg = {});

struct LogLikelihood {
  double value = 0.0;
  /// Monte Carlo standard error (nonzero only when rows with two or more
  /// censored entries are present).
  double se = 0.0;
};

struct LogLikConfig {
  long draws = 20000;
  std::uint64_t seed = 7;
  int threads = 1;
};

/// Observed-data log-likelihood sum_i log int_{D_i} phi(x_io, x_ic) dx_ic.
LogLikelihood observed_loglik(const CensoredDataset& data, const ModelParams& params,
                              const LogLikConfig& cfg = {});

/// observed_loglik / n - (rho / 2) sum_{h != k} |theta_hk|: the objective whose
/// stationarity conditions the EM fixed point satisfies.
double penalized_objective(const CensoredDataset& data, const ModelParams& params, double rho,
                           const LogLikConfig& cfg = {});

}  // namespace cglasso
