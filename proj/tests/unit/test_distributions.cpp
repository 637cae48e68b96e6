#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "nel/distributions.hpp"
#include "nel/errors.hpp"
#include "oracles.hpp"

namespace nel {
namespace {

TEST(GaussianLogPdf, StandardNormalAtMode) {
  EXPECT_NEAR(log_gaussian_pdf(Vector::Zero(1), Vector::Zero(1), Matrix::Identity(1, 1)),
              -0.5 * std::log(2 * M_PI), 1e-12);
  EXPECT_NEAR(log_gaussian_pdf(Vector::Zero(2), Vector::Zero(2), Matrix::Identity(2, 2)),
              -1.8378770664093453, 1e-12);
}

TEST(GaussianLogPdf, MatchesDirectEvaluation) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix cov = oracle::random_spd(3, rng);
    Vector x(3), mu(3);
    for (int i = 0; i < 3; ++i) {
      x(i) = z(rng);
      mu(i) = z(rng);
    }
    EXPECT_NEAR(log_gaussian_pdf(x, mu, cov), oracle::gaussian_logpdf(x, mu, cov), 1e-10);
  }
}

TEST(GaussianLogPdf, ScaledFormMatchesDense) {
  std::mt19937_64 rng(2);
  const Matrix c = oracle::random_spd(3, rng);
  CholeskyFactor f(c);
  Vector x(3), mu(3), work(3);
  x << 1.0, -0.5, 0.2;
  mu << 0.1, 0.1, -0.3;
  EXPECT_NEAR(log_gaussian_pdf_scaled(x, mu, f, 2.5, work),
              oracle::gaussian_logpdf(x, mu, 2.5 * c), 1e-10);
}

TEST(GaussianLogPdf, NonPositiveDefiniteCovarianceThrows) {
  Matrix cov(2, 2);
  cov << 1.0, 3.0, 3.0, 1.0;
  EXPECT_THROW(log_gaussian_pdf(Vector::Zero(2), Vector::Zero(2), cov), FactorizationError);
}

TEST(MatrixDensities, MatchDirectFormulas) {
  std::mt19937_64 rng(4);
  for (int d = 1; d <= 3; ++d) {
    const Matrix x = oracle::random_spd(d, rng);
    const Matrix s = oracle::random_spd(d, rng);
    const double dof = d + 1.7;
    EXPECT_NEAR(log_wishart_pdf(x, s, dof), oracle::wishart_logpdf(x, s, dof), 1e-9);
    EXPECT_NEAR(log_inverse_wishart_pdf(x, s, dof),
                oracle::inverse_wishart_logpdf(x, s, dof), 1e-9);
    EXPECT_NEAR(log_multivariate_gamma(d, 2.3), oracle::log_multigamma(d, 2.3), 1e-12);
  }
  EXPECT_NEAR(log_gamma_pdf(1.3, 2.5, 0.7), oracle::gamma_logpdf(1.3, 2.5, 0.7), 1e-12);
}

TEST(MatrixDensities, InvalidDegreesOfFreedomRejected) {
  EXPECT_THROW(log_wishart_pdf(Matrix::Identity(3, 3), Matrix::Identity(3, 3), 1.5),
               InvalidArgument);
}

// Entrywise Monte Carlo mean of matrix draws against `expected`, in units of
// the standard error.
double max_z_score(const std::vector<Matrix>& draws, const Matrix& expected) {
  const double n = static_cast<double>(draws.size());
  double worst = 0.0;
  for (int i = 0; i < expected.rows(); ++i) {
    for (int j = 0; j < expected.cols(); ++j) {
      double s = 0.0, s2 = 0.0;
      for (const auto& m : draws) {
        s += m(i, j);
        s2 += m(i, j) * m(i, j);
      }
      const double mean = s / n;
      const double se = std::sqrt((s2 / n - mean * mean) / n);
      worst = std::max(worst, std::abs(mean - expected(i, j)) / se);
    }
  }
  return worst;
}

TEST(Sampling, WishartMean) {
  std::mt19937_64 g(9);
  const Matrix scale = oracle::random_spd(2, g);
  Rng rng(17);
  std::vector<Matrix> draws;
  for (int i = 0; i < 40000; ++i) draws.push_back(sample_wishart(scale, 5.0, rng));
  EXPECT_LT(max_z_score(draws, 5.0 * scale), 3.0);
}

TEST(Sampling, InverseWishartMean) {
  std::mt19937_64 g(10);
  const Matrix scale = oracle::random_spd(2, g);
  Rng rng(18);
  std::vector<Matrix> draws;
  for (int i = 0; i < 40000; ++i) draws.push_back(sample_inverse_wishart(scale, 9.0, rng));
  EXPECT_LT(max_z_score(draws, scale / (9.0 - 2 - 1)), 3.0);
}

TEST(Sampling, GaussianMeanAndCovariance) {
  std::mt19937_64 g(12);
  const Matrix cov = oracle::random_spd(2, g);
  Vector mu(2);
  mu << 1.0, -2.0;
  Rng rng(19);
  std::vector<Matrix> firsts, seconds;
  for (int i = 0; i < 40000; ++i) {
    const Vector x = sample_gaussian(mu, cov, rng);
    firsts.push_back(x);
    seconds.push_back((x - mu) * (x - mu).transpose());
  }
  EXPECT_LT(max_z_score(firsts, mu), 3.0);
  EXPECT_LT(max_z_score(seconds, cov), 3.0);
}

TEST(Sampling, DirichletAndMultinomialShapes) {
  Rng rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const auto p = sample_symmetric_dirichlet(7, 1.0, rng);
    ASSERT_EQ(p.size(), 7u);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
    const auto c = sample_multinomial(300, p, rng);
    EXPECT_EQ(std::accumulate(c.begin(), c.end(), 0), 300);
  }
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(derive_seed(42, 0), derive_seed(42, 1));
  EXPECT_EQ(derive_seed(42, 3), derive_seed(42, 3));
}

TEST(Rng, LogCategoricalFrequencies) {
  const std::vector<double> logw{std::log(1.0), std::log(2.0), std::log(7.0)};
  Rng rng(5);
  std::vector<int> hits(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++hits[sample_log_categorical(logw, rng)];
  for (int k = 0; k < 3; ++k) {
    const double p = std::exp(logw[k]) / 10.0;
    EXPECT_LT(std::abs(hits[k] - n * p), 3 * std::sqrt(n * p * (1 - p)));
  }
  EXPECT_NEAR(log_sum_exp(logw), std::log(10.0), 1e-12);
  const auto probs = normalize_log_weights(logw);
  EXPECT_NEAR(probs[2], 0.7, 1e-12);
}

}  // namespace
}  // namespace nel
