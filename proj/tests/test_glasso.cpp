#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cglasso/glasso.hpp"
#include "cglasso/model_core.hpp"
#include "cglasso/path_runner.hpp"
#include "oracles.hpp"

#include <random>

using namespace cglasso;

namespace {

Matrix random_cov(Index p, Index n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Matrix A(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) A(i, j) = nd(gen) * (i == j ? 1.0 : 0.4);
  Matrix x(n, p);
  for (Index i = 0; i < n; ++i) {
    Vector z(p);
    for (Index j = 0; j < p; ++j) z(j) = nd(gen);
    x.row(i) = (A * z).transpose();
  }
  return empirical_covariance(x);
}

}  // namespace

TEST_CASE("glasso agrees with an ADMM solution") {
  for (unsigned seed = 1; seed <= 6; ++seed) {
    const Index p = 3 + seed % 4;
    const Matrix S = random_cov(p, 40, seed);
    const double rmax = max_offdiag_abs(S);
    for (double frac : {0.9, 0.5, 0.2, 0.05}) {
      const double rho = frac * rmax;
      const auto sol = glasso_fit(S, rho);
      const Matrix ref = oracle::admm_glasso(S, rho);
      INFO("seed " << seed << " frac " << frac);
      CHECK(sol.converged);
      CHECK((sol.theta - ref).cwiseAbs().maxCoeff() < 1e-6);
      CHECK(sol.kkt_residual < 1e-8);
      CHECK((sol.theta * sol.sigma - Matrix::Identity(p, p)).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(glasso_objective(sol.theta, S, rho) >= glasso_objective(ref, S, rho) - 1e-10);
    }
  }
}

TEST_CASE("at or above the largest off-diagonal the solution is diagonal") {
  const Matrix S = random_cov(6, 50, 9);
  const double rmax = max_offdiag_abs(S);
  const auto sol = glasso_fit(S, rmax);
  for (Index h = 0; h < 6; ++h) {
    CHECK(sol.theta(h, h) == doctest::Approx(1.0 / S(h, h)).epsilon(1e-12));
    for (Index k = 0; k < 6; ++k)
      if (h != k) CHECK(sol.theta(h, k) == 0.0);
  }
  const auto below = glasso_fit(S, 0.99 * rmax);
  CHECK(ModelParams::from_parts(Vector::Zero(6), below.theta, below.sigma).offdiag_nonzeros() == 2);
}

TEST_CASE("rho zero recovers the inverse covariance") {
  const Matrix S = random_cov(5, 60, 4);
  const auto sol = glasso_fit(S, 0.0);
  const Matrix inv = S.inverse();
  // S is poorly conditioned here, so compare relative to the scale of theta.
  CHECK((sol.theta - inv).cwiseAbs().maxCoeff() < 1e-6 * inv.cwiseAbs().maxCoeff());
  CHECK(sol.kkt_residual < 1e-8);
}

TEST_CASE("warm starts reach the same solution") {
  const Matrix S = random_cov(8, 50, 5);
  const double rmax = max_offdiag_abs(S);
  const auto a = glasso_fit(S, 0.3 * rmax);
  const auto warm = glasso_fit(S, 0.4 * rmax);
  const auto b = glasso_fit(S, 0.3 * rmax, &warm);
  CHECK((a.theta - b.theta).cwiseAbs().maxCoeff() < 1e-7);
  const auto path = glasso_path(S, {0.9 * rmax, 0.6 * rmax, 0.3 * rmax});
  CHECK((path[2].theta - a.theta).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("glasso input validation") {
  Matrix S = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(glasso_fit(Matrix::Identity(2, 3), 0.1), DataError);
  S(0, 1) = 0.5;
  CHECK_THROWS_AS(glasso_fit(S, 0.1), DataError);
  S = Matrix::Identity(3, 3);
  S(2, 2) = 0.0;
  CHECK_THROWS_AS(glasso_fit(S, 0.1), DataError);
  // Rank-deficient S at rho = 0.
  Matrix x(2, 3);
  x << 1, 2, 3, 2, 1, 0;
  CHECK_THROWS_AS(glasso_fit(empirical_covariance(x) + 0.0 * Matrix::Identity(3, 3), 0.0),
                  NumericalError);
}

TEST_CASE("kkt residual flags a non-stationary point") {
  const Matrix S = random_cov(4, 30, 12);
  const double rho = 0.3 * max_offdiag_abs(S);
  const auto sol = glasso_fit(S, rho);
  CHECK(kkt_residual(sol.theta, sol.sigma, S, rho) < 1e-8);
  const Matrix I = Matrix::Identity(4, 4);
  CHECK(kkt_residual(I, I, S, rho) > 1e-3);
}
