#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cglasso/normal.hpp"
#include "cglasso/sim_bench.hpp"
#include "cglasso/study.hpp"
#include "fixtures.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace cglasso;

TEST_CASE("sparse precision generator") {
  const Matrix t = gen_sparse_precision(60, 0.1, 5);
  CHECK((t - t.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(t).eigenvalues().minCoeff();
  CHECK(lmin == doctest::Approx(0.3).epsilon(1e-9));
  int edges = 0;
  for (Index h = 0; h < 60; ++h)
    for (Index k = h + 1; k < 60; ++k)
      if (t(h, k) != 0.0) {
        ++edges;
        CHECK(std::fabs(t(h, k)) >= 0.3);
        CHECK(std::fabs(t(h, k)) <= 0.7);
      }
  const double expected = 0.1 * 60 * 59 / 2;
  CHECK(std::fabs(edges - expected) < 4.0 * std::sqrt(expected * 0.9));
  CHECK(gen_sparse_precision(60, 0.1, 5) == t);
  CHECK(gen_sparse_precision(60, 0.1, 6) != t);
}

TEST_CASE("censoring calibration") {
  const double mu = mu_for_censor_prob(40.0, 2.0, 0.25);
  CHECK(normal::sf((40.0 - mu) / 2.0) == doctest::Approx(0.25).epsilon(1e-12));
  SimSpec spec;
  spec.p = 12;
  spec.n = 20000;
  spec.H = 4;
  spec.censor_prob = 0.3;
  spec.seed = 9;
  const auto s = simulate(spec);
  REQUIRE(s.truth.censored_set.size() == 4);
  std::set<Index> D(s.truth.censored_set.begin(), s.truth.censored_set.end());
  for (Index h = 0; h < 12; ++h) {
    const double frac = static_cast<double>(s.data.censored_count(h)) / 20000.0;
    if (D.count(h))
      CHECK(std::fabs(frac - 0.3) < 4.0 * std::sqrt(0.3 * 0.7 / 20000));
    else
      CHECK(s.data.censored_count(h) == 0);
  }
  // Latent rows follow N(mu, theta^{-1}).
  const Matrix S = empirical_covariance(s.latent);
  const Matrix sigma = s.truth.theta.inverse();
  CHECK((S - sigma).cwiseAbs().maxCoeff() < 0.1 * sigma.diagonal().maxCoeff());
  CHECK((column_means(s.latent) - s.truth.mu).cwiseAbs().maxCoeff() < 0.1);
  for (Index i = 0; i < 20000; ++i)
    for (Index h = 0; h < 12; ++h)
      if (s.data.status(i, h) == Censor::Right) CHECK(s.latent(i, h) > 40.0);
}

TEST_CASE("simulation is reproducible") {
  SimSpec spec;
  spec.H = 3;
  spec.seed = 77;
  const auto a = simulate(spec);
  const auto b = simulate(spec);
  CHECK(a.latent == b.latent);
  CHECK(a.truth.censored_set == b.truth.censored_set);
  spec.seed = 78;
  CHECK(simulate(spec).latent != a.latent);
}

TEST_CASE("simulation settings validation") {
  SimSpec spec;
  spec.H = 11;
  CHECK_THROWS_AS(spec.validate(), UsageError);
  spec.H = 2;
  spec.censor_prob = 1.5;
  CHECK_THROWS_AS(spec.validate(), UsageError);
  spec.censor_prob = 0.2;
  spec.edge_prob = -0.1;
  CHECK_THROWS_AS(spec.validate(), UsageError);
}

TEST_CASE("edge rates and AUC") {
  Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> adj =
      Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(3, 3);
  adj(0, 1) = adj(1, 0) = 1;
  Matrix th = Matrix::Identity(3, 3);
  th(0, 1) = th(1, 0) = 0.2;
  th(1, 2) = th(2, 1) = -0.1;
  const auto [tpr, fpr] = edge_rates(th, adj);
  CHECK(tpr == 1.0);
  CHECK(fpr == 0.5);
  CHECK(path_auc({0.1, 0.3}, {0.5, 0.8}) == doctest::Approx(0.155));
  CHECK(path_auc({0.3, 0.1}, {0.8, 0.5}) == doctest::Approx(0.155));
  CHECK(path_auc({0.0, 1.0}, {0.0, 1.0}) == doctest::Approx(0.5));
}

TEST_CASE("metrics along a path") {
  Truth t;
  t.mu = Vector::Zero(2);
  t.theta = Matrix::Identity(2, 2);
  t.adjacency = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(2, 2);
  MethodPath mp;
  mp.rhos = {1.0, 0.5};
  mp.mu = {Vector::Constant(2, 1.0), Vector::Constant(2, 0.5)};
  mp.theta = {Matrix::Identity(2, 2) * 2.0, Matrix::Identity(2, 2)};
  const auto m = metrics(t, mp);
  CHECK(m.mse_mu[0] == doctest::Approx(2.0));
  CHECK(m.min_mse_mu == doctest::Approx(0.5));
  CHECK(m.min_mse_theta == doctest::Approx(0.0));
  mp.mu.clear();
  CHECK(std::isnan(metrics(t, mp).min_mse_mu));
}

TEST_CASE("baselines reduce to glasso without censoring") {
  const auto data = fixture::gaussian(5, 100, 4);
  PathOptions o;
  o.K = 6;
  o.rho_min = 0.01;
  const auto lod = baseline_lod_glasso(data, o);
  const auto mar = baseline_mar_em(data, o);
  const auto cg = cglasso_method(data, o);
  REQUIRE(lod.theta.size() == 6);
  REQUIRE(mar.theta.size() == 6);
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK((lod.theta[k] - cg.theta[k]).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((mar.theta[k] - cg.theta[k]).cwiseAbs().maxCoeff() < 1e-8);
  }
  CHECK(cg.max_kkt < 1e-6);
  CHECK(cg.unconverged == 0);
  CHECK(lod.mu.empty());
}

TEST_CASE("lod baseline rejects a column that becomes constant") {
  Matrix raw(4, 2);
  raw << 1.0, 5.0, 2.0, 6.0, 1.5, 7.0, 0.5, 8.0;
  const auto d = encode_censoring(raw, CensoringBounds::uniform(2, -kInf, 4.0));
  CHECK_THROWS_AS(baseline_lod_glasso(d, {}), DataError);
}

TEST_CASE("study configuration") {
  auto c = StudyConfig::defaults("approx_vs_exact");
  CHECK(c.p == 10);
  CHECK(c.vary == "D");
  c.apply(parse_config_text("# comment\nreplicates = 3\nsettings = 1, 2\n"));
  CHECK(c.replicates == 3);
  CHECK(c.settings == std::vector<double>{1.0, 2.0});
  CHECK_THROWS_AS(c.apply({{"bogus", "1"}}), UsageError);
  CHECK_THROWS_AS(c.apply({{"replicates", "x"}}), UsageError);
  CHECK_THROWS_AS(StudyConfig::defaults("model9"), UsageError);
  c.threads = 7;
  const auto back = StudyConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(c.to_json().find("threads") == std::string::npos);
}

TEST_CASE("small study is thread-count independent") {
  auto c = StudyConfig::defaults("model1");
  c.p = 8;
  c.n = 40;
  c.settings = {2};
  c.replicates = 3;
  c.K = 5;
  c.rho_min = 0.05;
  c.threads = 1;
  const auto a = run_study(c);
  c.threads = 3;
  const auto b = run_study(c);
  CHECK(replicates_csv(a) == replicates_csv(b));
  CHECK(aggregate_json(a) == aggregate_json(b));
  const auto s = summarize(a, 0, "cglasso", "auc");
  CHECK(s.count == 3);
  const auto dir = std::filesystem::temp_directory_path() / "cglasso_study_test";
  std::filesystem::remove_all(dir);
  write_study_report(a, dir.string());
  for (const char* f : {"replicates.csv", "aggregate.json", "timings.csv"})
    CHECK(std::filesystem::exists(dir / f));
  std::filesystem::remove_all(dir);
}
