#pragma once

// Small seeded datasets shared by the tests.

#include "cglasso/model_core.hpp"
#include "cglasso/normal.hpp"

#include <random>
#include <vector>

namespace fixture {

struct Bivariate {
  cglasso::Matrix latent;
  std::vector<bool> censored;  // column 1 above u
  double u = 0.0;
  cglasso::CensoredDataset data;
};

// n draws from N((1, 2), [[1, 0.5], [0.5, 1]]); column 1 is right-censored at
// its (1 - censor_prob) quantile.
inline Bivariate bivariate(unsigned long seed, cglasso::Index n = 50, double censor_prob = 0.3) {
  Bivariate b;
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  b.latent.resize(n, 2);
  const double r = 0.5;
  for (cglasso::Index i = 0; i < n; ++i) {
    const double z0 = nd(gen), z1 = nd(gen);
    b.latent(i, 0) = 1.0 + z0;
    b.latent(i, 1) = 2.0 + r * z0 + std::sqrt(1 - r * r) * z1;
  }
  b.u = 2.0 + cglasso::normal::upper_quantile(censor_prob);
  cglasso::Vector lo(2), hi(2);
  lo << -cglasso::kInf, -cglasso::kInf;
  hi << cglasso::kInf, b.u;
  b.data = cglasso::encode_censoring(b.latent, cglasso::CensoringBounds(lo, hi));
  for (cglasso::Index i = 0; i < n; ++i)
    b.censored.push_back(b.data.status(i, 1) == cglasso::Censor::Right);
  return b;
}

// Fully observed Gaussian sample with a sparse tridiagonal precision.
inline cglasso::CensoredDataset gaussian(cglasso::Index p, cglasso::Index n, unsigned long seed) {
  cglasso::Matrix theta = cglasso::Matrix::Identity(p, p) * 2.0;
  for (cglasso::Index h = 0; h + 1 < p; ++h) theta(h, h + 1) = theta(h + 1, h) = 0.6;
  const cglasso::Matrix L = theta.inverse().llt().matrixL();
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  cglasso::Matrix x(n, p);
  for (cglasso::Index i = 0; i < n; ++i) {
    cglasso::Vector z(p);
    for (cglasso::Index j = 0; j < p; ++j) z(j) = nd(gen);
    x.row(i) = (L * z).transpose();
    for (cglasso::Index j = 0; j < p; ++j) x(i, j) += static_cast<double>(j);
  }
  return cglasso::encode_censoring(x, cglasso::CensoringBounds::unbounded(p));
}

}  // namespace fixture
