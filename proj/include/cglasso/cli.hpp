#pragma once

#include "cglasso/em_engine.hpp"
#include "cglasso/path_runner.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cglasso {

/// Resolved options of a `fit` or `path` run.
struct RunConfig {
  std::string command = "path";
  std::string input;
  /// Broadcastable bound lists; empty means "use the file's #lower/#upper rows".
  std::vector<double> lower;
  std::vector<double> upper;
  /// "left" or "right" per column, or a single value; empty means the default rule.
  std::vector<std::string> na_side;
  EStepMode mode = EStepMode::MeanField;
  int K = 30;
  double rho_min = 1e-3;
  Spacing spacing = Spacing::Linear;
  std::optional<double> rho;
  std::uint64_t seed = 20180101;
  std::string out = ".";
  std::string criterion = "abic";
  std::string estimator = "cglasso";
  long gibbs_sweeps = 100000;
  long burn_in = 1000;
  bool exact_bic = false;
  long bic_draws = 20000;
  double em_tol = 1e-5;
  int em_max_iter = 500;
  /// Never affects results; excluded from the serialized form.
  int threads = 1;

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
};

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

/// Entry point of the command-line tool. args[0] is the program name.
/// Diagnostics go to `err` as a single line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cglasso
