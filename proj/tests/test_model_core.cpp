#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cglasso/dataset_io.hpp"
#include "cglasso/model_core.hpp"
#include "cglasso/normal.hpp"
#include "cglasso/parallel.hpp"
#include "cglasso/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

using namespace cglasso;

namespace {
const double NaN = std::numeric_limits<double>::quiet_NaN();
}

TEST_CASE("bounds reject inverted, equal and NaN limits") {
  Vector lo(2), hi(2);
  lo << 0.0, 1.0;
  hi << 1.0, 1.0;
  CHECK_THROWS_AS(CensoringBounds(lo, hi), DataError);
  hi << 1.0, NaN;
  CHECK_THROWS_AS(CensoringBounds(lo, hi), DataError);
  CHECK_THROWS_AS(CensoringBounds(lo, Vector(3)), DataError);
  hi << 1.0, kInf;
  CHECK_NOTHROW(CensoringBounds(lo, hi));
}

TEST_CASE("encode_censoring classifies values against the limits") {
  Matrix raw(4, 2);
  raw << 0.5, 3.0,  //
      2.0, 1.0,     //
      -1.0, NaN,    //
      1.0, 0.0;
  Vector lo(2), hi(2);
  lo << 0.0, -kInf;
  hi << 1.0, 2.0;
  const auto d = encode_censoring(raw, CensoringBounds(lo, hi));
  CHECK(d.status(0, 0) == Censor::Observed);
  CHECK(d.status(0, 1) == Censor::Right);
  CHECK(d.status(1, 0) == Censor::Right);
  CHECK(d.status(2, 0) == Censor::Left);
  // NaN goes to the finite side.
  CHECK(d.status(2, 1) == Censor::Right);
  // A value equal to a limit is observed.
  CHECK(d.status(3, 0) == Censor::Observed);
  CHECK(d.threshold(1, 0) == 1.0);
  CHECK(d.threshold(2, 0) == 0.0);
  CHECK(std::isnan(d.value(1, 0)));
  CHECK(d.censored_count() == 4);
  CHECK(d.censored_count(0) == 2);
  CHECK(d.observed_count(1) == 2);
}

TEST_CASE("encode_censoring rejects a missing marker on an infinite side") {
  Matrix raw(2, 1);
  raw << 1.0, NaN;
  CHECK_THROWS_AS(encode_censoring(raw, CensoringBounds::uniform(1, 0.0, kInf), {Censor::Right}),
                  DataError);
  CHECK_THROWS_AS(encode_censoring(raw, CensoringBounds::unbounded(1)), DataError);
}

TEST_CASE("dataset validation") {
  Matrix v(2, 2);
  v << 1, 2, 3, 4;
  IndicatorMatrix ind = IndicatorMatrix::Zero(2, 2);
  const auto b = CensoringBounds::uniform(2, 0.0, 10.0);
  CHECK_NOTHROW(CensoredDataset(v, ind, b));
  CHECK_THROWS_AS(CensoredDataset(v, IndicatorMatrix::Zero(2, 3), b), DataError);
  CHECK_THROWS_AS(CensoredDataset(v, ind, CensoringBounds::uniform(3, 0.0, 1.0)), DataError);
  // observed value beyond a limit
  v(0, 0) = 11.0;
  CHECK_THROWS_AS(CensoredDataset(v, ind, b), DataError);
  v(0, 0) = 1.0;
  ind(1, 1) = 2;
  CHECK_THROWS_AS(CensoredDataset(v, ind, b), DataError);
  ind(1, 1) = -1;
  v(1, 1) = NaN;
  const CensoredDataset d(v, ind, b);
  CHECK(d.threshold(1, 1) == 0.0);
  CHECK(d.names().size() == 2);
  CHECK_THROWS_AS(CensoredDataset(v, ind, b, {"only-one"}), DataError);
}

TEST_CASE("per-observation bounds and shifting") {
  Matrix v(2, 1);
  v << 1.0, NaN;
  IndicatorMatrix ind(2, 1);
  ind << 0, 1;
  Matrix lo(2, 1), hi(2, 1);
  lo << -kInf, -kInf;
  hi << 2.0, 5.0;
  const CensoredDataset d(v, ind, lo, hi);
  CHECK(d.has_per_observation_bounds());
  CHECK(d.threshold(1, 0) == 5.0);
  CHECK(d.upper(0, 0) == 2.0);
  Vector shift(1);
  shift << 3.0;
  const auto s = d.shifted(shift);
  CHECK(s.value(0, 0) == 4.0);
  CHECK(s.threshold(1, 0) == 8.0);
}

TEST_CASE("partition_row orders left before right") {
  Matrix raw(1, 5);
  raw << 5.0, -5.0, 0.5, 9.0, -9.0;
  const auto d = encode_censoring(raw, CensoringBounds::uniform(5, -1.0, 1.0));
  const auto part = partition_row(d, 0);
  CHECK(part.observed == std::vector<Index>{2});
  CHECK(part.left == std::vector<Index>{1, 4});
  CHECK(part.right == std::vector<Index>{0, 3});
  CHECK(part.censored == std::vector<Index>{1, 4, 0, 3});
  CHECK_FALSE(part.fully_observed());
  CHECK_THROWS_AS(partition_row(d, 1), DataError);
}

TEST_CASE("model params") {
  Matrix theta(3, 3);
  theta << 2.0, -0.5, 0.0,  //
      -0.5, 1.5, 0.3,       //
      0.0, 0.3, 1.0;
  const auto m = ModelParams::from_precision(Vector::Zero(3), theta);
  CHECK((m.sigma() * theta - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(m.offdiag_nonzeros() == 4);
  CHECK_FALSE(m.is_diagonal());
  CHECK(m.log_det_theta() == doctest::Approx(std::log(theta.determinant())).epsilon(1e-13));
  Matrix bad = theta;
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(ModelParams::from_precision(Vector::Zero(3), bad), NumericalError);
  CHECK_THROWS_AS(ModelParams::from_precision(Vector::Zero(2), theta), DataError);
  const auto diag = ModelParams::from_precision(Vector::Ones(3), Matrix::Identity(3, 3) * 2.0);
  CHECK(diag.is_diagonal());
  CHECK(diag.offdiag_nonzeros() == 0);
}

TEST_CASE("empirical moments use denominator n") {
  Matrix x(4, 2);
  x << 1, 2, 3, 4, 5, 7, 7, 3;
  const Vector m = column_means(x);
  CHECK(m(0) == 4.0);
  const Matrix S = empirical_covariance(x);
  // var of {1,3,5,7} with denominator 4
  CHECK(S(0, 0) == doctest::Approx(5.0));
  CHECK(S(0, 1) == doctest::Approx(((1 - 4.) * (2 - 4.) + (3 - 4.) * 0 + (5 - 4.) * 3 + (7 - 4.) * -1) / 4));
}

TEST_CASE("csv round trip is bit exact and keeps both censoring sides") {
  Matrix raw(3, 3);
  raw << 0.1, 1.0 / 3.0, -2.5,  //
      NaN, 7.0, 1e-300,         //
      0.2, -7.0, NaN;
  Vector lo(3), hi(3);
  lo << -kInf, -1.0, -3.0;
  hi << 5.0, 2.0, kInf;
  const auto d = encode_censoring(raw, CensoringBounds(lo, hi), {}, {"a", "b", "c"});
  CHECK(d.status(1, 1) == Censor::Right);
  CHECK(d.status(2, 1) == Censor::Left);
  std::stringstream ss;
  write_dataset_csv(ss, d, "test");
  const auto back = read_dataset_csv(ss);
  REQUIRE(back.n() == 3);
  CHECK(back.names() == d.names());
  for (Index i = 0; i < 3; ++i)
    for (Index h = 0; h < 3; ++h) {
      CHECK(back.status(i, h) == d.status(i, h));
      if (d.status(i, h) == Censor::Observed) CHECK(back.value(i, h) == d.value(i, h));
    }
  CHECK(back.bounds().lower() == d.bounds().lower());
  CHECK(back.bounds().upper() == d.bounds().upper());
}

TEST_CASE("csv reader with broadcast bound overrides and explicit sides") {
  std::istringstream in("# comment\nx,y\n1,NA\nNA,2\n3,4\n");
  CsvReadOptions o;
  o.upper = std::vector<double>{3.5};
  const auto d = read_dataset_csv(in, o);
  CHECK(d.status(0, 1) == Censor::Right);
  CHECK(d.status(1, 0) == Censor::Right);
  CHECK(d.status(2, 1) == Censor::Right);  // 4 > 3.5
  std::istringstream bad("x\n1\nNA\n");
  CHECK_THROWS_AS(read_dataset_csv(bad), DataError);
  std::istringstream ragged("x,y\n1\n");
  CHECK_THROWS_AS(read_dataset_csv(ragged), DataError);
}

TEST_CASE("number formatting") {
  CHECK(format_double(kInf) == "Inf");
  CHECK(format_double(-kInf) == "-Inf");
  CHECK(parse_double("inf") == kInf);
  CHECK(parse_double("-INF") == -kInf);
  CHECK(parse_double(format_double(0.1)) == 0.1);
  CHECK_THROWS_AS(parse_double("abc"), DataError);
  CHECK_THROWS_AS(parse_double("1.5x"), DataError);
  CHECK(parse_double_list("1,2.5,-Inf") == std::vector<double>{1.0, 2.5, -kInf});
}

TEST_CASE("normal helpers against erfc") {
  for (double z : {-8.0, -3.0, -0.5, 0.0, 0.7, 2.0, 6.0, 20.0}) {
    const double q = 0.5 * std::erfc(z / std::numbers::sqrt2);
    CHECK(normal::sf(z) == doctest::Approx(q).epsilon(1e-14));
    CHECK(normal::cdf(-z) == doctest::Approx(q).epsilon(1e-14));
    CHECK(normal::log_sf(z) == doctest::Approx(std::log(q)).epsilon(1e-13));
    CHECK(normal::inverse_mills(z) == doctest::Approx(normal::pdf(z) / q).epsilon(1e-12));
  }
  // log_sf beyond the underflow of sf: -z^2/2 - log(z sqrt(2 pi)) - 1/z^2 + ...
  const double z = 60.0;
  const double asym = -0.5 * z * z - std::log(z) - normal::kLogSqrt2Pi + std::log1p(-1.0 / (z * z) + 3.0 / std::pow(z, 4));
  CHECK(normal::log_sf(z) == doctest::Approx(asym).epsilon(1e-12));
  for (double p : {1e-300, 1e-20, 0.01, 0.3, 0.5, 0.9}) {
    CHECK(normal::cdf(normal::quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    CHECK(normal::sf(normal::upper_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("seed derivation and random streams are reproducible") {
  static_assert(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  RandomStream a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
  double sum = 0, sum2 = 0;
  RandomStream c(7);
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    const double z = c.normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::fabs(sum / N) < 5.0 / std::sqrt(N));
  CHECK(std::fabs(sum2 / N - 1.0) < 5.0 * std::sqrt(2.0 / N));
}

TEST_CASE("parallel_for covers every index and rethrows the lowest failure") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  try {
    parallel_for(100, 3, [](std::size_t i) {
      if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "17");
  }
}
