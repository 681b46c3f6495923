#pragma once

#include "cglasso/common.hpp"

#include <optional>

namespace cglasso {

struct GlassoConfig {
  /// Converged when the largest change of sigma over one sweep falls below
  /// tol * mean(|diag S|).
  double tol = 1e-9;
  int max_sweeps = 10000;
  /// Inner lasso: stop when the largest coordinate change is below
  /// inner_tol * mean(|diag S|).
  double inner_tol = 1e-12;
  int max_inner_passes = 100000;
};

struct GlassoSolution {
  Matrix theta;
  Matrix sigma;
  double rho = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Maximizes log det(Theta) - tr(Theta S) - rho * sum_{h != k} |theta_hk|
/// over positive-definite Theta. The diagonal is not penalized.
///
/// Block coordinate ascent on the primal: each column update solves the
/// row/column subproblem with the rest of Theta held fixed, through an inner
/// lasso solved by cyclic coordinate descent. Every iterate stays positive
/// definite and the objective never decreases across sweeps.
///
/// Throws DataError for non-square, asymmetric, non-PSD S or a non-positive
/// diagonal, and NumericalError for rho = 0 with singular S. When the sweep
/// cap is hit the last iterate is returned with converged = false.
GlassoSolution glasso_fit(const Matrix& S, double rho, const GlassoSolution* warm = nullptr,
                          const GlassoConfig& cfg = {});

/// Largest violation of the stationarity conditions:
///   |sigma_hk - s_hk - rho sign(theta_hk)|   where theta_hk != 0 (h != k),
///   max(0, |sigma_hk - s_hk| - rho)          where theta_hk == 0 (h != k),
///   |sigma_hh - s_hh|                        on the diagonal.
double kkt_residual(const Matrix& theta, const Matrix& sigma, const Matrix& S, double rho);

/// log det(Theta) - tr(Theta S) - rho * sum_{h != k} |theta_hk|.
double glasso_objective(const Matrix& theta, const Matrix& S, double rho);

/// max_{h != k} |s_hk|: the smallest rho with a diagonal solution.
double max_offdiag_abs(const Matrix& S);

}  // namespace cglasso
