#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <vector>

#include "ebshrink/error.hpp"
#include "ebshrink/estimator.hpp"

using namespace ebshrink;

namespace {

constexpr double kTol = 1e-10;

std::vector<ArmSummary> arms_with(const std::vector<double>& means, double se) {
  std::vector<ArmSummary> out;
  for (std::size_t i = 0; i < means.size(); ++i) {
    ArmSummary a;
    a.arm_id = "a" + std::to_string(i);
    a.n = 100;
    a.mean = means[i];
    a.std_err = se;
    out.push_back(a);
  }
  return out;
}

PooledStats pooled(std::size_t k, double s2, DofStyle style = DofStyle::KMinus3) {
  PooledStats p;
  p.k = k;
  p.dispersion = s2;
  p.dof_style = style;
  return p;
}

}  // namespace

TEST(PooledStats, Examples) {
  auto p = pooled_stats(std::vector<double>{1, 2, 3});
  EXPECT_NEAR(p.grand_mean, 2.0, kTol);
  EXPECT_NEAR(p.dispersion, 2.0, kTol);
  p = pooled_stats(std::vector<double>{5, 5, 5, 5});
  EXPECT_EQ(p.grand_mean, 5.0);
  EXPECT_EQ(p.dispersion, 0.0);
  p = pooled_stats(std::vector<double>{0, 4});
  EXPECT_NEAR(p.grand_mean, 2.0, kTol);
  EXPECT_NEAR(p.dispersion, 8.0, kTol);
}

TEST(PooledStats, RejectsFewerThanTwoArms) {
  EXPECT_THROW(pooled_stats(std::vector<double>{1.0}), InvalidInput);
  EXPECT_THROW(pooled_stats(std::vector<double>{}), InvalidInput);
}

TEST(PooledStats, DofConventions) {
  EXPECT_EQ(pooled(7, 1.0).dof(), 4.0);
  EXPECT_EQ(pooled(7, 1.0, DofStyle::KMinus1).dof(), 6.0);
  EXPECT_EQ(pooled(2, 1.0).dof(), -1.0);
}

TEST(ShrinkageFactor, Examples) {
  EXPECT_NEAR(shrinkage_factor(1.0, pooled(7, 8.0)), 0.5, kTol);
  EXPECT_EQ(shrinkage_factor(1.0, pooled(3, 5.0)), 0.0);
  EXPECT_EQ(shrinkage_factor(10.0, pooled(13, 1.0)), 1.0);
  EXPECT_NEAR(shrinkage_factor(1.0, pooled(3, 4.0, DofStyle::KMinus1)), 0.5, kTol);
}

TEST(ShrinkageFactor, ZeroDispersionIsFullShrinkage) {
  EXPECT_EQ(shrinkage_factor(1.0, pooled(5, 0.0)), 1.0);
  EXPECT_EQ(shrinkage_factor(0.0, pooled(5, 0.0)), 1.0);
}

TEST(ShrinkageFactor, NegativeVarianceRejected) {
  EXPECT_THROW(shrinkage_factor(-1.0, pooled(7, 8.0)), InvalidInput);
}

TEST(JsEstimate, SevenArmExample) {
  const auto arms = arms_with({1, 2, 3, 4, 5, 6, 7}, std::sqrt(3.5));
  const auto rep = js_estimate(arms);
  EXPECT_NEAR(rep.pooled.grand_mean, 4.0, kTol);
  EXPECT_NEAR(rep.pooled.dispersion, 28.0, kTol);
  const double want[] = {2.5, 3, 3.5, 4, 4.5, 5, 5.5};
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_NEAR(rep.arms[i].xi, 0.5, kTol);
    EXPECT_NEAR(rep.arms[i].estimate, want[i], kTol);
  }
}

TEST(JsEstimate, EqualMeansPoolFully) {
  const auto rep = js_estimate(arms_with({2.5, 2.5, 2.5, 2.5, 2.5}, 1.0));
  for (const auto& r : rep.arms) {
    EXPECT_EQ(r.xi, 1.0);
    EXPECT_EQ(r.estimate, 2.5);
  }
}

TEST(JsEstimate, ZeroNoiseKeepsMeans) {
  const std::vector<double> m{0.3, -1.2, 4.0, 2.2, 0.9};
  const auto rep = js_estimate(arms_with(m, 0.0));
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_EQ(rep.arms[i].xi, 0.0);
    EXPECT_EQ(rep.arms[i].estimate, m[i]);
  }
}

TEST(JsEstimate, IntervalUsesFullVariance) {
  const auto rep = js_estimate(arms_with({1, 2, 3, 4, 5, 6, 7}, std::sqrt(3.5)));
  const double z = two_sided_z(0.95);
  for (const auto& r : rep.arms) {
    ASSERT_TRUE(r.var_full && r.ci_low && r.ci_high);
    EXPECT_NEAR(*r.ci_high - r.estimate, z * std::sqrt(*r.var_full), kTol);
    EXPECT_NEAR(r.estimate - *r.ci_low, z * std::sqrt(*r.var_full), kTol);
  }
}

TEST(JsEstimate, ThreeArmsNoShrinkageAndNoFullVariance) {
  const auto rep = js_estimate(arms_with({1, 2, 6}, 1.0));
  EXPECT_FALSE(rep.full_variance_defined());
  for (const auto& r : rep.arms) {
    EXPECT_EQ(r.xi, 0.0);
    EXPECT_EQ(r.estimate, r.raw_mean);
    EXPECT_FALSE(r.var_full.has_value());
    EXPECT_FALSE(r.ci_low.has_value());
  }
  ShrinkageOptions opt;
  opt.dof_style = DofStyle::KMinus1;
  EXPECT_TRUE(js_estimate(arms_with({1, 2, 6}, 1.0), opt).full_variance_defined());
}

TEST(JsEstimate, PooledNoiseUsesAverageVariance) {
  auto arms = arms_with({1, 2, 3, 4, 5, 6, 7}, 1.0);
  arms[0].std_err = std::sqrt(2.0);
  arms[1].std_err = 0.0;
  ShrinkageOptions opt;
  opt.noise = NoiseModel::Pooled;
  const auto rep = js_estimate(arms, opt);
  ASSERT_TRUE(rep.pooled_std_err_sq);
  EXPECT_NEAR(*rep.pooled_std_err_sq, 1.0, kTol);
  for (const auto& r : rep.arms) EXPECT_NEAR(r.xi, 4.0 / 28.0, kTol);
}

TEST(VarianceNaive, Examples) {
  EXPECT_NEAR(variance_naive(4.0, 0.5), 2.0, kTol);
  EXPECT_EQ(variance_naive(4.0, 1.0), 0.0);
  EXPECT_EQ(variance_naive(4.0, 0.0), 4.0);
  EXPECT_THROW(variance_naive(4.0, 1.5), InvalidInput);
}

TEST(VarianceFull, Examples) {
  EXPECT_EQ(variance_full(3.0, 0.0, 1.7, pooled(8, 5.0)), 3.0);
  EXPECT_EQ(variance_full(3.0, 0.0, 1.7, pooled(8, 5.0), FullVarianceForm::MainText), 3.0);
  EXPECT_NEAR(variance_full(2.0, 1.0, 0.0, pooled(8, 5.0)), 0.25, kTol);
  EXPECT_NEAR(variance_full(1.0, 0.5, 2.0, pooled(7, 8.0)), 0.5 + 0.5 / 7 + 0.5, kTol);
  EXPECT_NEAR(variance_full(1.0, 0.5, 2.0, pooled(7, 8.0)), 1.0714285714285714, kTol);
}

TEST(VarianceFull, MainTextMiddleTermUsesDispersion) {
  // (1 - xi) sigma^2 + xi s^2 / K + 2 xi^2 d^2 / (K - 3)
  EXPECT_NEAR(variance_full(1.0, 0.5, 2.0, pooled(7, 8.0), FullVarianceForm::MainText),
              0.5 + 0.5 * 8.0 / 7 + 0.5, kTol);
}

TEST(VarianceFull, UndefinedAtThreeArms) {
  EXPECT_THROW(variance_full(1.0, 0.0, 0.0, pooled(3, 5.0)), NumericalDegeneracy);
  EXPECT_NO_THROW(variance_full(1.0, 0.0, 0.0, pooled(3, 5.0, DofStyle::KMinus1)));
}

TEST(VarianceMixture, Examples) {
  EXPECT_EQ(variance_mixture(3.0, 0.0, 9.0, 8), 3.0);
  EXPECT_NEAR(variance_mixture(2.0, 1.0, 123.0, 8), 0.25, kTol);
  EXPECT_NEAR(variance_mixture(1.0, 0.5, 2.0, 7), 0.5 + 1.0 / 14 + 1.0, kTol);
  EXPECT_NEAR(variance_mixture(1.0, 0.5, 2.0, 7), 1.5714285714285714, kTol);
}

TEST(NormalQuantile, MatchesBoostTo1e9) {
  const boost::math::normal_distribution<double> nd;
  for (double p : {1e-300, 1e-12, 1e-6, 0.001, 0.02425, 0.025, 0.1, 0.3, 0.5, 0.7, 0.975, 0.97575, 0.999999,
                   1 - 1e-12}) {
    const double want = boost::math::quantile(nd, p);
    EXPECT_NEAR(normal_quantile(p), want, 1e-9 * std::max(1.0, std::abs(want))) << p;
  }
  EXPECT_NEAR(two_sided_z(0.95), 1.959963984540054, 1e-12);
}

TEST(NormalQuantile, RejectsOutOfRange) {
  EXPECT_THROW(normal_quantile(0.0), InvalidInput);
  EXPECT_THROW(normal_quantile(1.0), InvalidInput);
  EXPECT_THROW(two_sided_z(1.0), InvalidInput);
}

TEST(ArmSummary, FromCounts) {
  const auto a = ArmSummary::from_counts("x", 200, 50);
  EXPECT_EQ(a.mean, 0.25);
  EXPECT_NEAR(a.std_err, std::sqrt(0.25 * 0.75 / 200), 1e-15);
  EXPECT_THROW(ArmSummary::from_counts("x", 10, 11), InvalidInput);
  ArmSummary bad;
  bad.arm_id = "b";
  bad.n = 0;
  EXPECT_THROW(validate(bad), InvalidInput);
}
