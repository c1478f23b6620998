#include <gtest/gtest.h>

#include <cmath>

#include <bayesid/baselines.hpp>
#include <bayesid/pipeline.hpp>

#include "test_util.hpp"

using namespace bayesid;

TEST(LeastSquares, Identity) {
  const Vector y = testutil::Random(1).normal_vector(4);
  EXPECT_LT((least_squares(Matrix::Identity(4, 4), y).xi - y).norm(), 1e-15);
}

TEST(LeastSquares, MeanOfObservations) {
  Matrix H(2, 1);
  H << 1, 1;
  const auto r = least_squares(H, Eigen::Vector2d(1, 3));
  EXPECT_NEAR(r.xi[0], 2.0, 1e-15);
  EXPECT_NEAR(r.residual2, 2.0, 1e-14);
}

TEST(LeastSquares, NormalEquations) {
  testutil::Random rnd(2);
  const Matrix H = rnd.normal_matrix(20, 5);
  const Vector y = rnd.normal_vector(20);
  const auto r = least_squares(H, y);
  EXPECT_LE((H.transpose() * (y - H * r.xi)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LeastSquares, RankDeficientGivesMinimumNorm) {
  Matrix H(3, 2);
  H << 1, 1, 2, 2, -1, -1;
  const Vector y = Eigen::Vector3d(2, 4, -2);
  const auto r = least_squares(H, y);
  EXPECT_NEAR(r.xi[0], 1.0, 1e-12);
  EXPECT_NEAR(r.xi[1], 1.0, 1e-12);
}

TEST(LeastSquares, RejectsBadInput) {
  EXPECT_THROW(least_squares(Matrix::Ones(3, 2), Vector::Ones(2)), InvalidArgument);
  Matrix H = Matrix::Ones(3, 2);
  H(1, 1) = NAN;
  EXPECT_THROW(least_squares(H, Vector::Ones(3)), InvalidArgument);
}

TEST(Ridge, ZeroThetaIsLeastSquares) {
  testutil::Random rnd(3);
  const Matrix H = rnd.normal_matrix(12, 4);
  const Vector y = rnd.normal_vector(12);
  EXPECT_LT((ridge(H, y, 0.0).xi - least_squares(H, y).xi).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ridge, IdentityShrinks) {
  const auto r = ridge(Matrix::Identity(2, 2), Eigen::Vector2d(2, 4), 1.0);
  EXPECT_NEAR(r.xi[0], 1.0, 1e-14);
  EXPECT_NEAR(r.xi[1], 2.0, 1e-14);
  EXPECT_NEAR(r.objective, r.residual2 + 1.0 * 5.0, 1e-13);
}

TEST(Ridge, TwoByTwo) {
  Matrix H(2, 2);
  H << 1, 1, 0, 1;
  const auto r = ridge(H, Eigen::Vector2d(1, 1), 0.5);
  EXPECT_NEAR(r.xi[0], 0.5 / 2.75, 1e-14);
  EXPECT_NEAR(r.xi[1], 2.0 / 2.75, 1e-14);
}

TEST(Ridge, NegativeThetaThrows) {
  EXPECT_THROW(ridge(Matrix::Identity(2, 2), Vector::Ones(2), -1e-3), InvalidArgument);
}

TEST(Ridge, ShrinkageMonotone) {
  testutil::Random rnd(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix H = rnd.normal_matrix(15, 5);
    const Vector y = rnd.normal_vector(15);
    double prev = INFINITY;
    for (double theta : log_grid(1e-6, 1e4, 30)) {
      const double norm = ridge(H, y, theta).xi.norm();
      EXPECT_LE(norm, prev * (1.0 + 1e-12));
      prev = norm;
    }
  }
}

TEST(Lasso, ZeroKappaIsLeastSquares) {
  testutil::Random rnd(5);
  const Matrix H = rnd.normal_matrix(20, 4);
  const Vector y = rnd.normal_vector(20);
  const auto r = lasso(H, y, 0.0);
  EXPECT_TRUE(r.converged);
  EXPECT_LT((r.xi - least_squares(H, y).xi).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Lasso, SoftThreshold) {
  const auto r = lasso(Matrix::Identity(2, 2), Eigen::Vector2d(3, 0.05), 0.2);
  EXPECT_NEAR(r.xi[0], 2.9, 1e-14);
  EXPECT_EQ(r.xi[1], 0.0);
  EXPECT_EQ(r.support, std::vector<Eigen::Index>{0});
  EXPECT_LE(lasso_optimality(Matrix::Identity(2, 2), Eigen::Vector2d(3, 0.05), r.xi, 0.2), 1e-12);
}

TEST(Lasso, LargeKappaZeroesEverything) {
  testutil::Random rnd(6);
  const Matrix H = rnd.normal_matrix(10, 3);
  const Vector y = rnd.normal_vector(10);
  const double kappa = 2.0 * (H.transpose() * y).cwiseAbs().maxCoeff();
  const auto r = lasso(H, y, kappa);
  EXPECT_EQ(r.xi.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(r.support.empty());
}

TEST(Lasso, SubgradientOptimalityOnRandomInstances) {
  testutil::Random rnd(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = rnd.integer(5, 25), c = rnd.integer(1, 6);
    const Matrix H = rnd.normal_matrix(m, c);
    const Vector y = rnd.normal_vector(m);
    const double kappa = rnd.uniform(0.0, 2.0) * (H.transpose() * y).cwiseAbs().maxCoeff();
    const auto r = lasso(H, y, kappa);
    ASSERT_TRUE(r.converged);
    // Explicit check of the subgradient conditions.
    const Vector g = -2.0 * H.transpose() * (y - H * r.xi);
    const double scale = std::max(1.0, 2.0 * (H.transpose() * y).cwiseAbs().maxCoeff());
    for (int l = 0; l < c; ++l) {
      if (r.xi[l] != 0.0) {
        EXPECT_LE(std::abs(g[l] + kappa * (r.xi[l] > 0 ? 1.0 : -1.0)), 1e-10 * scale);
      } else {
        EXPECT_LE(std::abs(g[l]), kappa + 1e-10 * scale);
      }
    }
    EXPECT_NEAR(r.objective, r.residual2 + kappa * r.xi.lpNorm<1>(), 1e-12 * (1.0 + r.objective));
  }
}

TEST(Lasso, NonConvergenceIsFlagged) {
  testutil::Random rnd(8);
  Matrix H = rnd.normal_matrix(30, 6);
  H.col(5) = H.col(4) + 1e-6 * H.col(3);  // slow coordinate descent
  const Vector y = rnd.normal_vector(30);
  const auto r = lasso(H, y, 1e-3, 1e-14, 2);
  EXPECT_FALSE(r.converged);
  EXPECT_GT(r.optimality, 1e-14);
}

TEST(Stlsq, ZeroLambdaIsLeastSquares) {
  testutil::Random rnd(9);
  const Matrix H = rnd.normal_matrix(12, 4);
  const Vector y = rnd.normal_vector(12);
  EXPECT_LT((stlsq(H, y, 0.0).xi - least_squares(H, y).xi).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Stlsq, ThresholdsSmallCoefficient) {
  const auto r = stlsq(Matrix::Identity(2, 2), Eigen::Vector2d(3, 0.05), 0.1);
  EXPECT_EQ(r.xi[0], 3.0);
  EXPECT_EQ(r.xi[1], 0.0);
  EXPECT_FALSE(r.degenerate);
}

TEST(Stlsq, ExhaustiveSupportSearchAgrees) {
  // Among supports whose LS coefficients all clear lambda and whose excluded
  // coefficients were below lambda, the STLSQ result is a fixed point.
  testutil::Random rnd(10);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix H = rnd.normal_matrix(20, 4);
    Vector xi_true = Vector::Zero(4);
    xi_true[trial % 4] = 2.0;
    xi_true[(trial + 1) % 4] = -1.5;
    const Vector y = H * xi_true + 1e-3 * rnd.normal_vector(20);
    const auto r = stlsq(H, y, 0.5);
    for (int l = 0; l < 4; ++l) EXPECT_EQ(r.xi[l] != 0.0, xi_true[l] != 0.0);
  }
}

TEST(Stlsq, EverythingThresholdedIsDegenerate) {
  const auto r = stlsq(Matrix::Identity(2, 2), Eigen::Vector2d(0.1, 0.05), 1.0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.xi, Vector::Zero(2));
}

TEST(Stlsq, FixedPointOnOwnSupport) {
  testutil::Random rnd(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix H = rnd.normal_matrix(25, 6);
    const Vector y = rnd.normal_vector(25);
    const auto r = stlsq(H, y, 0.2);
    if (r.degenerate) continue;
    Matrix Hs(25, static_cast<Eigen::Index>(r.support.size()));
    for (std::size_t k = 0; k < r.support.size(); ++k) Hs.col(static_cast<Eigen::Index>(k)) = H.col(r.support[k]);
    const auto again = stlsq(Hs, y, 0.2);
    for (std::size_t k = 0; k < r.support.size(); ++k) {
      EXPECT_NEAR(again.xi[static_cast<Eigen::Index>(k)], r.xi[r.support[k]], 1e-12);
    }
  }
}

TEST(Stlsq, NegativeLambdaThrows) {
  EXPECT_THROW(stlsq(Matrix::Identity(2, 2), Vector::Ones(2), -1.0), InvalidArgument);
}
