#pragma once

#include "cglasso/sim_bench.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace cglasso {

// Study config files hold one `key = value` pair per line; `#` starts a
// comment. Keys:
//
//   study         model1 | model2 | model3 | approx_vs_exact | censor_robustness
//   replicates    number of replicates per setting
//   seed          master seed
//   p, n          dimensions
//   k             expected degree; edge probability is k / p (ignored when vary = k)
//   vary          H | k | D | q: the quantity that changes across settings
//   settings      comma-separated values of `vary`
//   H             censored variables when vary = k
//   u             right-censoring threshold
//   censor_prob   censoring probability of each censored variable
//   K, rho_min, spacing
//   mode          E-step of the cglasso method (meanfield | exact)
//   gibbs_sweeps, burn_in, gibbs_batches
//   em_tol, em_max_iter, glasso_tol
//   methods       comma-separated subset of cglasso, cglasso-exact, lod-glasso, mar-em
//
// `threads` may also be given; it never changes the results and is not part
// of the resolved config written to the reports.
struct StudyConfig {
  std::string study = "model1";
  int replicates = 20;
  std::uint64_t seed = 2018;
  int threads = 1;
  Index p = 50;
  Index n = 100;
  double k = 3.0;
  std::string vary = "H";
  std::vector<double> settings{25.0, 35.0};
  Index H = 30;
  double u = 40.0;
  double censor_prob = 0.5;
  int K = 30;
  double rho_min = 1e-3;
  Spacing spacing = Spacing::Linear;
  EStepMode mode = EStepMode::MeanField;
  long gibbs_sweeps = 100000;
  long burn_in = 1000;
  int gibbs_batches = 50;
  double em_tol = 1e-5;
  int em_max_iter = 500;
  double glasso_tol = 1e-9;
  std::vector<std::string> methods{"cglasso", "lod-glasso", "mar-em"};

  /// Defaults of a named study. Throws UsageError for an unknown id.
  static StudyConfig defaults(const std::string& study);
  /// Applies `key = value` overrides (UsageError on unknown keys or bad values).
  void apply(const std::map<std::string, std::string>& overrides);
  void validate() const;
  /// Canonical JSON text of every result-affecting field.
  std::string to_json() const;
  static StudyConfig from_json(const std::string& text);
};

/// Parses `key = value` lines.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);

struct MethodOutcome {
  std::string method;
  bool ok = false;
  std::string error;
  PathMetrics metrics;
  /// Euclidean norm of (latent - imputed) over the censored cells.
  double imputation_error = 0.0;
  /// Convergence diagnostics copied from the method's path.
  double max_kkt = std::numeric_limits<double>::quiet_NaN();
  double max_fixed_point = std::numeric_limits<double>::quiet_NaN();
  int unconverged = 0;
  double cpu_seconds = 0.0;
};

struct ReplicateOutcome {
  std::size_t setting = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  /// Set when data generation itself failed.
  std::string error;
  std::vector<MethodOutcome> methods;
  /// Largest squared distances between the mean-field and exact paths.
  double max_dmu2 = 0.0;
  double max_dtheta2 = 0.0;
  bool has_proximity = false;
};

struct StudyReport {
  StudyConfig config;
  std::vector<ReplicateOutcome> replicates;
};

/// Runs every (setting, replicate) pair; replicates run in parallel and each
/// uses the stream derive_seed(seed, setting, replicate).
StudyReport run_study(const StudyConfig& config);

/// Writes replicates.csv, aggregate.json and timings.csv into `dir`.
void write_study_report(const StudyReport& report, const std::string& dir);

std::string replicates_csv(const StudyReport& report);
std::string aggregate_json(const StudyReport& report);
std::string timings_csv(const StudyReport& report);

/// Mean and sample standard deviation of a metric over the successful
/// replicates of one setting and method.
struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  int count = 0;
};
Summary summarize(const StudyReport& report, std::size_t setting, const std::string& method,
                  const std::string& metric);

}  // namespace cglasso
