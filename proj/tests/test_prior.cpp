#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ebshrink/error.hpp"
#include "ebshrink/prior.hpp"

using namespace ebshrink;

TEST(FitBetaMoments, UniformFromItsMoments) {
  const auto f = fit_beta_moments(0.5, 1.0 / 12.0);
  EXPECT_NEAR(f.params.alpha, 1.0, 1e-10);
  EXPECT_NEAR(f.params.beta, 1.0, 1e-10);
  EXPECT_FALSE(f.uniform_fallback);
}

TEST(FitBetaMoments, OneThree) {
  const auto f = fit_beta_moments(0.25, 0.0375);
  EXPECT_NEAR(f.params.alpha, 1.0, 1e-10);
  EXPECT_NEAR(f.params.beta, 3.0, 1e-10);
}

TEST(FitBetaMoments, ConcentrationLimit) {
  const auto f = fit_beta_moments(0.3, 1e-6);
  EXPECT_NEAR(f.params.mean(), 0.3, 1e-10);
  EXPECT_GT(f.params.alpha + f.params.beta, 2e5);
}

TEST(FitBetaMoments, OverdispersedFallsBackToUniform) {
  const auto f = fit_beta_moments(0.5, 0.3);
  EXPECT_TRUE(f.uniform_fallback);
  EXPECT_EQ(f.params.alpha, 1.0);
  EXPECT_EQ(f.params.beta, 1.0);
}

TEST(FitBeta, SampleMomentsUseKMinus1) {
  // mean 0.25; deviations +-0.15, +-0.25 -> variance (2*0.0225 + 2*0.0625)/3
  const std::vector<double> m{0.1, 0.4, 0.0, 0.5};
  const auto f = fit_beta(m);
  EXPECT_NEAR(f.sample_mean, 0.25, 1e-9);
  EXPECT_NEAR(f.sample_variance, 0.17 / 3.0, 1e-9);
  EXPECT_NEAR(f.params.mean(), f.sample_mean, 1e-12);
  EXPECT_NEAR(f.params.variance(), f.sample_variance, 1e-12);
}

TEST(FitBeta, Errors) {
  EXPECT_THROW(fit_beta(std::vector<double>{0.3}), InvalidInput);
  EXPECT_THROW(fit_beta(std::vector<double>{0.3, 0.3, 0.3}), NumericalDegeneracy);
  EXPECT_THROW(fit_beta(std::vector<double>{0.3, 1.3}), InvalidInput);
}

TEST(FitBeta, ClampsZeroAndOne) {
  const auto f = fit_beta(std::vector<double>{0.0, 0.0, 0.01, 0.02});
  EXPECT_GT(f.params.alpha, 0.0);
  EXPECT_TRUE(std::isfinite(f.params.beta));
}

TEST(FitBeta, OrderIndependent) {
  const std::vector<double> a{0.011, 0.032, 0.027, 0.019, 0.024, 0.0301};
  const std::vector<double> b{0.0301, 0.019, 0.011, 0.024, 0.032, 0.027};
  const auto fa = fit_beta(a);
  const auto fb = fit_beta(b);
  EXPECT_EQ(fa.params.alpha, fb.params.alpha);
  EXPECT_EQ(fa.params.beta, fb.params.beta);
}

TEST(Posterior, Examples) {
  auto p = posterior({1, 1}, 10, 90);
  EXPECT_EQ(p.alpha, 11.0);
  EXPECT_EQ(p.beta, 91.0);
  p = posterior({2, 3}, 0, 0);
  EXPECT_EQ(p.alpha, 2.0);
  EXPECT_EQ(p.beta, 3.0);
  p = posterior({1, 3}, 5, 5);
  EXPECT_EQ(p.alpha, 6.0);
  EXPECT_EQ(p.beta, 8.0);
}

TEST(BetaParams, Validate) {
  EXPECT_NO_THROW(validate(BetaParams{0.5, 2.0}));
  EXPECT_THROW(validate(BetaParams{0.0, 2.0}), InvalidInput);
  EXPECT_THROW(validate(BetaParams{1.0, INFINITY}), InvalidInput);
}
