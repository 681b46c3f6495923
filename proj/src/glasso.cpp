#include "cglasso/glasso.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cglasso {

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

void check_input(const Matrix& S, double rho) {
  const Index p = S.rows();
  if (p < 1 || S.cols() != p) throw DataError("glasso: S must be a non-empty square matrix");
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw DataError("glasso: rho must be finite and >= 0");
  if (!S.allFinite()) throw DataError("glasso: S has non-finite entries");
  const double scale = S.diagonal().cwiseAbs().maxCoeff();
  for (Index h = 0; h < p; ++h) {
    if (!(S(h, h) > 0.0))
      throw DataError("glasso: diagonal of S must be strictly positive (variable " +
                      std::to_string(h + 1) + ")");
    for (Index k = 0; k < h; ++k)
      if (std::fabs(S(h, k) - S(k, h)) > 1e-12 * scale)
        throw DataError("glasso: S is not symmetric");
  }
  Eigen::LLT<Matrix> llt(S + Matrix::Identity(p, p) * (1e-10 * scale));
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -1e-10 * scale)
      throw DataError("glasso: S is not positive semidefinite");
  }
  if (rho == 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) <= 1e-12 * scale)
      throw NumericalError("glasso: rho = 0 requires a positive definite S");
  }
}

}  // namespace

double max_offdiag_abs(const Matrix& S) {
  double m = 0.0;
  for (Index k = 0; k < S.cols(); ++k)
    for (Index h = 0; h < S.rows(); ++h)
      if (h != k) m = std::max(m, std::fabs(S(h, k)));
  return m;
}

double glasso_objective(const Matrix& theta, const Matrix& S, double rho) {
  Eigen::LLT<Matrix> llt(theta);
  if (llt.info() != Eigen::Success) return -kInf;
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  double l1 = theta.cwiseAbs().sum() - theta.diagonal().cwiseAbs().sum();
  return logdet - (theta.cwiseProduct(S)).sum() - rho * l1;
}

double kkt_residual(const Matrix& theta, const Matrix& sigma, const Matrix& S, double rho) {
  const Index p = theta.rows();
  if (theta.cols() != p || sigma.rows() != p || sigma.cols() != p || S.rows() != p ||
      S.cols() != p)
    throw DataError("kkt_residual: shape mismatch");
  double worst = 0.0;
  for (Index k = 0; k < p; ++k) {
    for (Index h = 0; h < p; ++h) {
      const double g = sigma(h, k) - S(h, k);
      double r;
      if (h == k) {
        r = std::fabs(g);
      } else if (theta(h, k) != 0.0) {
        r = std::fabs(g - rho * (theta(h, k) > 0.0 ? 1.0 : -1.0));
      } else {
        r = std::max(0.0, std::fabs(g) - rho);
      }
      worst = std::max(worst, r);
    }
  }
  return worst;
}

GlassoSolution glasso_fit(const Matrix& S, double rho, const GlassoSolution* warm,
                          const GlassoConfig& cfg) {
  check_input(S, rho);
  const Index p = S.rows();
  const double scale = S.diagonal().cwiseAbs().mean();

  Matrix theta;
  Matrix W;
  if (warm && warm->theta.rows() == p && warm->sigma.rows() == p) {
    theta = warm->theta;
    W = warm->sigma;
  } else {
    theta = S.diagonal().cwiseInverse().asDiagonal();
    W = S.diagonal().asDiagonal();
  }

  GlassoSolution sol;
  sol.rho = rho;
  const double outer_tol = cfg.tol * scale;
  // The inner solve only needs to be somewhat finer than the outer test.
  const double inner_tol = std::max(cfg.inner_tol, 1e-2 * cfg.tol) / scale;

  Matrix A(p, p);
  Vector wj(p);
  Vector gamma(p);
  Vector r(p);
  std::vector<Index> active;
  active.reserve(static_cast<std::size_t>(p));
  int sweep = 0;
  bool converged = p == 1;
  if (p == 1) {
    theta(0, 0) = 1.0 / S(0, 0);
    W(0, 0) = S(0, 0);
  }
  while (!converged && sweep < cfg.max_sweeps) {
    ++sweep;
    double max_change = 0.0;
    for (Index j = 0; j < p; ++j) {
      // A = (Theta without row/col j)^{-1}, embedded with a zero row/col j.
      wj = W.col(j);
      A.noalias() = W - wj * wj.transpose() / wj(j);
      A.row(j).setZero();
      A.col(j).setZero();

      gamma = theta.col(j);
      gamma(j) = 0.0;
      r.noalias() = A * gamma;
      const double s22 = S(j, j);

      // Cyclic coordinate descent; after a full pass, iterate on the nonzero
      // coordinates only and confirm with another full pass.
      auto update = [&](Index k) {
        const double akk = A(k, k);
        const double partial = s22 * (r(k) - akk * gamma(k)) + S(k, j);
        const double updated = -soft_threshold(partial, rho) / (s22 * akk);
        const double d = updated - gamma(k);
        if (d != 0.0) {
          r.noalias() += d * A.col(k);
          gamma(k) = updated;
        }
        return std::fabs(d);
      };
      int passes = 0;
      while (passes < cfg.max_inner_passes) {
        double delta_max = 0.0;
        active.clear();
        for (Index k = 0; k < p; ++k) {
          if (k == j) continue;
          delta_max = std::max(delta_max, update(k));
          if (gamma(k) != 0.0) active.push_back(k);
        }
        ++passes;
        if (delta_max <= inner_tol) break;
        while (passes < cfg.max_inner_passes) {
          double d_active = 0.0;
          for (Index k : active) d_active = std::max(d_active, update(k));
          ++passes;
          if (d_active <= inner_tol) break;
        }
      }

      // Optimal diagonal given gamma: theta_jj = 1/s22 + gamma^T A gamma.
      const double theta_jj = 1.0 / s22 + gamma.dot(r);
      for (Index k = 0; k < p; ++k) {
        if (k == j) continue;
        theta(k, j) = gamma(k);
        theta(j, k) = gamma(k);
      }
      theta(j, j) = theta_jj;

      // Sigma from the block-inverse formulas with u = A gamma, in place.
      for (Index k = 0; k < p; ++k) {
        for (Index h = 0; h < p; ++h) {
          double v;
          if (h == j && k == j) v = s22;
          else if (h == j) v = -s22 * r(k);
          else if (k == j) v = -s22 * r(h);
          else v = A(h, k) + s22 * r(h) * r(k);
          max_change = std::max(max_change, std::fabs(v - W(h, k)));
          W(h, k) = v;
        }
      }
    }
    converged = max_change < outer_tol;
  }

  Eigen::LLT<Matrix> llt(theta);
  if (llt.info() != Eigen::Success)
    throw NumericalError("glasso: iterate lost positive definiteness");
  sol.theta = std::move(theta);
  sol.sigma = llt.solve(Matrix::Identity(p, p));
  sol.sigma = 0.5 * (sol.sigma + sol.sigma.transpose());
  sol.iterations = sweep;
  sol.converged = converged;
  sol.kkt_residual = kkt_residual(sol.theta, sol.sigma, S, rho);
  return sol;
}

}  // namespace cglasso
