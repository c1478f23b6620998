// Full-length Lorenz runs (T = 100, m = 10001). Built with -DBAYESID_SLOW_TESTS=ON.

#include <gtest/gtest.h>

#include <bayesid/bayesid.hpp>

using namespace bayesid;

namespace {

RunConfig full_lorenz(Algorithm algo) {
  RunConfig cfg;
  cfg.T = 100.0;
  cfg.algo = algo;
  return cfg;
}

}  // namespace

TEST(SlowReproduction, StlsqLorenz) {
  const auto res = identify(full_lorenz(Algorithm::stlsq));
  EXPECT_LE((res.model.xi - res.data.xi_true).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ((res.model.xi.array() != 0.0).count(), 7);
}

TEST(SlowReproduction, JmapLorenz) {
  const auto res = identify(full_lorenz(Algorithm::jmap));
  EXPECT_LE((res.model.xi - res.data.xi_true).cwiseAbs().maxCoeff(), 1e-4);
  ASSERT_TRUE(res.model.sigma);
  EXPECT_GT(res.model.sigma->minCoeff(), 0.0);
  EXPECT_LE(res.model.sigma->maxCoeff(), 1e-3);
  for (const auto& tr : res.model.traces) {
    EXPECT_GT(tr.optimum, 0u);
    EXPECT_LT(tr.optimum + 1, tr.records.size());
  }
}
