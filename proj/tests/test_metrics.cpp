#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <bayesid/hyper_est.hpp>
#include <bayesid/metrics.hpp>
#include <bayesid/pipeline.hpp>

#include "test_util.hpp"

using namespace bayesid;

TEST(InformationCriteria, Examples) {
  const auto a = information_criteria(0.0, std::numbers::e, 2.0);
  EXPECT_DOUBLE_EQ(a.aic, 4.0);
  EXPECT_DOUBLE_EQ(a.bic, 2.0);
  EXPECT_FALSE(a.aicc);  // m < c + 2
  const auto b = information_criteria(0.0, 103.0, 1.0);
  ASSERT_TRUE(b.aicc);
  EXPECT_NEAR(*b.aicc, 2.12, 1e-14);
}

TEST(InformationCriteria, CorrectionIsNonnegative) {
  testutil::Random rnd(1);
  for (int i = 0; i < 100; ++i) {
    const double m = rnd.integer(5, 500), c = rnd.integer(1, 20);
    const auto ic = information_criteria(rnd.normal() * 100, m, c);
    if (m > c + 2) {
      ASSERT_TRUE(ic.aicc);
      EXPECT_GE(*ic.aicc, ic.aic);
    } else {
      EXPECT_FALSE(ic.aicc);
    }
  }
}

TEST(InformationCriteria, MatchesGaussianLogDensity) {
  testutil::Random rnd(2);
  const Matrix H = rnd.normal_matrix(15, 3);
  const Vector xi = rnd.normal_vector(3), y = H * xi + 0.3 * rnd.normal_vector(15);
  const Vector w = rnd.log_uniform_vector(15, 0.05, 1.0);
  const GaussianBelief lik{H * xi, Matrix(w.asDiagonal())};
  const double ll = gaussian_loglik(y - H * xi, w);
  EXPECT_NEAR(ll, log_density(lik, y), 1e-10);
  EXPECT_NEAR(information_criteria(ll, 15, 3).aic, -2.0 * log_density(lik, y) + 6.0, 1e-9);
}

TEST(InformationCriteria, IndependentOfPrior) {
  testutil::Random rnd(3);
  const Matrix H = rnd.normal_matrix(20, 3);
  const Vector y = rnd.normal_vector(20);
  const auto a = make_record(H, y, jmap_fit(H, y, IGParams(3, 1), IGParams(3, 10)), std::nullopt, 100);
  // Same estimate and noise variances, different prior variances.
  FitState s = jmap_fit(H, y, IGParams(3, 1), IGParams(3, 10));
  s.w_xi *= 50.0;
  s.v_xi *= 50.0;
  const auto b = make_record(H, y, s, std::nullopt, 100);
  EXPECT_EQ(a.metrics.aic, b.metrics.aic);
  EXPECT_EQ(a.metrics.bic, b.metrics.bic);
  EXPECT_NE(a.norms.prior, b.norms.prior);
}

TEST(InformationCriteria2, Examples) {
  EXPECT_NEAR(information_criteria_2norm(50.0, 50.0, 3.0).aic, 6.0, 1e-14);
  EXPECT_NEAR(information_criteria_2norm(1.0, 100.0, 9.0).aic, 100.0 * std::log(0.01) + 18.0, 1e-12);
  const auto a = information_criteria_2norm(3.0, 100.0, 9.0), b = information_criteria_2norm(6.0, 100.0, 9.0);
  EXPECT_NEAR(b.aic - a.aic, 100.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(b.bic - a.bic, 100.0 * std::log(2.0), 1e-12);
}

TEST(InformationCriteria2, ZeroResidualSentinel) {
  const auto ic = information_criteria_2norm(0.0, 100.0, 9.0);
  EXPECT_TRUE(std::isinf(ic.aic) && ic.aic < 0);
  EXPECT_TRUE(std::isinf(ic.bic) && ic.bic < 0);
  EXPECT_THROW(information_criteria_2norm(-1.0, 100.0, 9.0), InvalidArgument);
}

TEST(ErrorBar, CountsNonzeros) {
  const Vector xi = Eigen::Vector4d(2.0, -3.0, 0.0, 0.5);
  const GaussianBelief post{xi, Matrix(xi.cwiseAbs2().asDiagonal())};
  EXPECT_DOUBLE_EQ(*error_bar(post, xi), 3.0);
}

TEST(ErrorBar, Homogeneity) {
  testutil::Random rnd(4);
  const Vector xi = rnd.normal_vector(5);
  const Matrix A = rnd.normal_matrix(5, 5);
  const GaussianBelief post{xi, A * A.transpose()};
  EXPECT_NEAR(*error_bar(post, 3.0 * xi), *error_bar(post, xi) / 9.0, 1e-12 * *error_bar(post, xi));
}

TEST(ErrorBar, NegligibleCoefficientsIgnored) {
  const Vector xi = Eigen::Vector2d(1.0, 1e-13);
  const GaussianBelief post{xi, Matrix::Identity(2, 2)};
  EXPECT_DOUBLE_EQ(*error_bar(post, xi), 1.0);
}

TEST(ErrorBar, AllZeroUndefined) {
  const GaussianBelief post{Vector::Zero(3), Matrix::Identity(3, 3)};
  EXPECT_FALSE(error_bar(post, Vector::Zero(3)));
}

TEST(LogPor, Examples) {
  testutil::Random rnd(5);
  const Matrix A = rnd.normal_matrix(3, 3);
  const GaussianBelief p{rnd.normal_vector(3), A * A.transpose() + Matrix::Identity(3, 3)};
  const Vector at = rnd.normal_vector(3);
  EXPECT_EQ(log_por(p, p, at), 0.0);
  EXPECT_EQ(log_por_absolute(p, p.mean), 0.0);
}

TEST(LogPor, SignAgreesWithLogDensityAtEqualCovariance) {
  testutil::Random rnd(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix A = rnd.normal_matrix(3, 3);
    const Matrix cov = A * A.transpose() + 0.5 * Matrix::Identity(3, 3);
    const GaussianBelief p1{rnd.normal_vector(3), cov}, p2{rnd.normal_vector(3), cov};
    const Vector at = rnd.normal_vector(3);
    const double por = log_por(p1, p2, at);
    const double dens = log_density(p1, at) - log_density(p2, at);
    EXPECT_NEAR(por, dens, 1e-10 * (1 + std::abs(dens)));
  }
}

TEST(LogPor, AbsoluteArgminMatchesPosteriorNormArgmin) {
  testutil::Random rnd(7);
  const Matrix H = rnd.normal_matrix(50, 4);
  const Vector truth = rnd.normal_vector(4);
  const Vector y = H * truth + 0.02 * rnd.normal_vector(50);
  const auto tr = outer_sweep(H, y, HyperAlgorithm::jmap, log_grid(1e2, 1e-6, 15), IGParams::from_mean(3, 1e3), truth);
  std::size_t best = 0;
  for (std::size_t k = 0; k < tr.records.size(); ++k) {
    if (std::abs(tr.records[k].metrics.log_por_absolute) < std::abs(tr.records[best].metrics.log_por_absolute)) best = k;
  }
  EXPECT_EQ(best, tr.optimum);
}
