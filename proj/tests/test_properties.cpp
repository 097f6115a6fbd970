// Randomized invariants. Each property runs over a fixed-seed stream of
// generated cases so failures reproduce; the case index is reported.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ebshrink/estimator.hpp"
#include "ebshrink/prior.hpp"
#include "ebshrink/staticsim.hpp"

using namespace ebshrink;

namespace {

constexpr int kCases = 400;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(real(std::log(lo), std::log(hi))); }

  // Arms with means on a random location/scale and per-arm or shared noise.
  std::vector<ArmSummary> arms(int k_min, int k_max, bool equal_noise) {
    const int k = integer(k_min, k_max);
    const double center = real(-100, 100);
    const double spread = log_uniform(1e-3, 1e3);
    const double shared = log_uniform(1e-3, 1e3);
    std::vector<ArmSummary> out(k);
    for (int i = 0; i < k; ++i) {
      out[i].arm_id = "a" + std::to_string(i);
      out[i].n = static_cast<std::uint64_t>(integer(1, 100000));
      out[i].mean = center + spread * real(-1, 1);
      out[i].std_err = equal_noise ? shared : shared * log_uniform(0.1, 10);
    }
    // Occasional exact duplicates and zero noise.
    if (integer(0, 9) == 0) out[0].mean = out[k - 1].mean;
    if (!equal_noise && integer(0, 9) == 0) out[0].std_err = 0.0;
    return out;
  }

  ShrinkageOptions options() {
    ShrinkageOptions o;
    o.dof_style = integer(0, 1) ? DofStyle::KMinus3 : DofStyle::KMinus1;
    o.level = real(0.5, 0.999);
    return o;
  }

 private:
  std::mt19937_64 rng_;
};

double span_of(const std::vector<ArmSummary>& arms) {
  double lo = arms[0].mean, hi = arms[0].mean;
  for (const auto& a : arms) {
    lo = std::min(lo, a.mean);
    hi = std::max(hi, a.mean);
  }
  return std::max({hi - lo, std::abs(hi), std::abs(lo), 1e-300});
}

}  // namespace

TEST(Properties, XiClampedAndEstimateBetweenMeanAndCenter) {
  Gen g(101);
  for (int c = 0; c < kCases; ++c) {
    const auto arms = g.arms(2, 40, false);
    const auto rep = js_estimate(arms, g.options());
    const double m_bar = rep.pooled.grand_mean;
    for (const auto& r : rep.arms) {
      ASSERT_GE(r.xi, 0.0) << c;
      ASSERT_LE(r.xi, 1.0) << c;
      ASSERT_GE(r.estimate, std::min(r.raw_mean, m_bar)) << c;
      ASSERT_LE(r.estimate, std::max(r.raw_mean, m_bar)) << c;
    }
  }
}

TEST(Properties, PooledStatsBounds) {
  Gen g(102);
  for (int c = 0; c < kCases; ++c) {
    auto arms = g.arms(2, 30, false);
    if (g.integer(0, 4) == 0) {
      for (auto& a : arms) a.mean = arms[0].mean;
    }
    const auto p = pooled_stats(arms);
    const auto [lo, hi] = std::minmax_element(arms.begin(), arms.end(),
                                              [](const auto& a, const auto& b) { return a.mean < b.mean; });
    ASSERT_GE(p.grand_mean, lo->mean) << c;
    ASSERT_LE(p.grand_mean, hi->mean) << c;
    ASSERT_GE(p.dispersion, 0.0) << c;
    ASSERT_EQ(p.dispersion == 0.0, lo->mean == hi->mean) << c;
  }
}

TEST(Properties, HomoskedasticMeanPreservation) {
  Gen g(103);
  for (int c = 0; c < kCases; ++c) {
    const auto arms = g.arms(4, 40, true);
    const auto rep = js_estimate(arms);
    double avg = 0.0;
    for (const auto& r : rep.arms) avg += r.estimate;
    avg /= rep.arms.size();
    ASSERT_NEAR(avg, rep.pooled.grand_mean, 1e-12 * span_of(arms)) << c;
  }
}

TEST(Properties, HomoskedasticRankPreservation) {
  Gen g(104);
  for (int c = 0; c < kCases; ++c) {
    const auto arms = g.arms(4, 40, true);
    const auto rep = js_estimate(arms);
    for (std::size_t i = 0; i < arms.size(); ++i) {
      for (std::size_t j = 0; j < arms.size(); ++j) {
        if (arms[i].mean < arms[j].mean) ASSERT_LE(rep.arms[i].estimate, rep.arms[j].estimate) << c;
      }
    }
  }
}

TEST(Properties, ShrinkageGrowsWithExtremity) {
  Gen g(105);
  for (int c = 0; c < kCases; ++c) {
    const auto arms = g.arms(4, 40, true);
    const auto rep = js_estimate(arms);
    std::vector<std::pair<double, double>> dev_shift;
    for (const auto& r : rep.arms) {
      dev_shift.emplace_back(std::abs(r.raw_mean - rep.pooled.grand_mean), std::abs(r.raw_mean - r.estimate));
    }
    std::sort(dev_shift.begin(), dev_shift.end());
    for (std::size_t i = 1; i < dev_shift.size(); ++i) {
      ASSERT_GE(dev_shift[i].second, dev_shift[i - 1].second - 1e-12 * span_of(arms)) << c;
    }
  }
}

TEST(Properties, VanishingNoiseRecoversRawMeans) {
  Gen g(106);
  for (int c = 0; c < kCases; ++c) {
    auto arms = g.arms(5, 30, false);
    double prev = std::numeric_limits<double>::infinity();
    for (double scale : {1.0, 0.1, 0.01}) {
      auto scaled = arms;
      for (auto& a : scaled) a.std_err *= scale;
      const auto rep = js_estimate(scaled);
      double worst = 0.0;
      for (const auto& r : rep.arms) worst = std::max(worst, std::abs(r.estimate - r.raw_mean));
      ASSERT_LE(worst, prev + 1e-12 * span_of(arms)) << c;
      prev = worst;
    }
  }
}

TEST(Properties, VarianceOrdering) {
  Gen g(107);
  for (int c = 0; c < kCases; ++c) {
    const auto arms = g.arms(4, 40, false);
    for (auto form : {FullVarianceForm::Appendix, FullVarianceForm::MainText}) {
      ShrinkageOptions o;
      o.full_form = form;
      const auto rep = js_estimate(arms, o);
      for (std::size_t i = 0; i < arms.size(); ++i) {
        const auto& r = rep.arms[i];
        const double se2 = arms[i].std_err * arms[i].std_err;
        ASSERT_LE(r.var_naive, se2 * (1 + 1e-15)) << c;
        ASSERT_TRUE(r.var_full.has_value());
        ASSERT_GE(*r.var_full, r.var_naive) << c;
        ASSERT_GE(r.var_mixture, r.var_naive) << c;
        ASSERT_LE(*r.ci_low, r.estimate);
        ASSERT_GE(*r.ci_high, r.estimate);
      }
    }
  }
}

TEST(Properties, PermutationEquivariance) {
  Gen g(108);
  for (int c = 0; c < kCases / 4; ++c) {
    const auto arms = g.arms(2, 25, false);
    std::vector<std::size_t> perm(arms.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(c));
    std::vector<ArmSummary> shuffled;
    for (auto p : perm) shuffled.push_back(arms[p]);
    const auto a = js_estimate(arms);
    const auto b = js_estimate(shuffled);
    const double tol = 1e-12 * span_of(arms);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      ASSERT_EQ(b.arms[i].arm_id, a.arms[perm[i]].arm_id);
      ASSERT_NEAR(b.arms[i].estimate, a.arms[perm[i]].estimate, tol) << c;
    }
  }
}

TEST(Properties, BetaFitRoundTrip) {
  Gen g(109);
  int checked = 0;
  for (int c = 0; c < kCases; ++c) {
    const int k = g.integer(2, 50);
    const double center = g.real(0.005, 0.6);
    const double spread = center * g.real(0.01, 0.9);
    std::vector<double> m(k);
    for (auto& x : m) x = std::clamp(center + spread * g.real(-1, 1), 0.0, 1.0);
    BetaFit f;
    try {
      f = fit_beta(m);
    } catch (const std::exception&) {
      continue;
    }
    if (f.uniform_fallback) continue;
    ++checked;
    ASSERT_NEAR(f.params.mean(), f.sample_mean, 1e-9 * f.sample_mean) << c;
    ASSERT_NEAR(f.params.variance(), f.sample_variance, 1e-9 * f.sample_variance) << c;
  }
  EXPECT_GT(checked, kCases / 2);
}

TEST(Properties, PosteriorMeanBetweenPriorAndData) {
  Gen g(110);
  for (int c = 0; c < kCases; ++c) {
    const BetaParams prior{g.log_uniform(0.1, 100), g.log_uniform(0.1, 1000)};
    const auto n = static_cast<std::uint64_t>(g.integer(1, 5000));
    const auto s = static_cast<std::uint64_t>(g.integer(0, static_cast<int>(n)));
    const double rate = static_cast<double>(s) / n;
    const double pm = prior.mean();
    const double post = posterior(prior, s, n - s).mean();
    if (rate == pm) continue;
    ASSERT_GT(post, std::min(rate, pm)) << c;
    ASSERT_LT(post, std::max(rate, pm)) << c;
  }
}

TEST(Properties, BootstrapNeverShrinksNoise) {
  Gen g(111);
  for (int c = 0; c < kCases; ++c) {
    std::vector<TruthArm> t;
    const int k = g.integer(1, 10);
    for (int i = 0; i < k; ++i) {
      t.push_back({"a" + std::to_string(i), static_cast<std::uint64_t>(g.integer(1, 100000)), g.real(-5, 5),
                   g.log_uniform(1e-4, 10)});
    }
    const double f = g.real(0.001, 1.0);
    const auto d = bootstrap_replicate(t, f, make_key(c, 0), 0);
    for (int i = 0; i < k; ++i) {
      ASSERT_GE(d[i].n, 1u);
      ASSERT_LE(d[i].n, t[i].n);
      ASSERT_GE(d[i].std_err, t[i].std_err * (1 - 1e-15)) << c;
    }
  }
}
