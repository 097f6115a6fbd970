#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "ebshrink/kernels.hpp"
#include "ebshrink/rng.hpp"
#include "kernels/lanes_scalar.hpp"
#include "kernels/generic.hpp"

using namespace ebshrink;

TEST(Philox, KnownAnswers) {
  // Reference vectors of the Random123 distribution.
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(StreamKeys, DistinctAndStable) {
  EXPECT_EQ(make_key(1, 2, 3), make_key(1, 2, 3));
  EXPECT_FALSE(make_key(1, 2, 3) == make_key(1, 3, 2));
  EXPECT_FALSE(make_key(1, 2) == make_key(2, 2));
  EXPECT_NE(hash_label("arm1"), hash_label("arm2"));
  // FNV-1a of the empty string is the offset basis.
  EXPECT_EQ(hash_label(""), 0xcbf29ce484222325ULL);
}

TEST(UnitOpen, Endpoints) {
  EXPECT_GT(unit_open(0), 0.0);
  EXPECT_LT(unit_open(0xffffffffu), 1.0);
  EXPECT_EQ(unit_open(0x80000000u), 0.5 + 0.5 * 0x1p-32);
}

TEST(CounterStream, BelowIsUniform) {
  CounterStream s(make_key(9, 9), 0, StreamTag::Subsample);
  std::vector<int> hist(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++hist[s.below(7)];
  for (int h : hist) EXPECT_NEAR(h, n / 7.0, 5 * std::sqrt(n / 7.0));
  EXPECT_EQ(s.below(1), 0u);
}

TEST(CounterStream, ReproducibleSequence) {
  CounterStream a(make_key(4, 2), 3, StreamTag::Outcome);
  CounterStream b(make_key(4, 2), 3, StreamTag::Outcome);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(a.next_u32(), b.next_u32());
  CounterStream c(make_key(4, 2), 4, StreamTag::Outcome);
  CounterStream d(make_key(4, 2), 3, StreamTag::Outcome);
  int same = 0;
  for (int i = 0; i < 50; ++i) same += c.next_u32() == d.next_u32();
  EXPECT_LT(same, 3);
}

TEST(Polynomials, LogExpCosAccuracy) {
  using kernels::cos_two_pi;
  using kernels::exp_clamped;
  using kernels::log_pos;
  double worst_log = 0, worst_exp = 0, worst_cos = 0;
  for (int i = 1; i < 20000; ++i) {
    const double x = std::ldexp(1.0 + i / 20000.0, (i % 80) - 40);
    worst_log = std::max(worst_log, std::abs(log_pos<double, std::uint64_t>(x) - std::log(x)) /
                                        std::max(1.0, std::abs(std::log(x))));
    const double y = -50.0 + 100.0 * i / 20000.0;
    worst_exp = std::max(worst_exp, std::abs(exp_clamped<double, std::uint64_t>(y) / std::exp(y) - 1.0));
    const double u = i / 20000.0;
    worst_cos = std::max(worst_cos, std::abs(cos_two_pi<double, std::uint64_t>(u) - std::cos(2 * M_PI * u)));
  }
  EXPECT_LT(worst_log, 1e-15);
  EXPECT_LT(worst_exp, 1e-14);
  EXPECT_LT(worst_cos, 1e-14);
}

namespace {

struct Moments {
  double mean, var;
};

template <class Draw>
Moments sample_moments(int n, Draw draw) {
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double x = draw(static_cast<std::uint32_t>(i));
    s += x;
    ss += x * x;
  }
  const double m = s / n;
  return {m, ss / n - m * m};
}

}  // namespace

TEST(Samplers, NormalMoments) {
  const StreamKey key = make_key(11, 0);
  const int n = 200000;
  const auto m = sample_moments(n, [&](std::uint32_t i) { return normal_at(key, {i, 0, 0, 1}); });
  EXPECT_NEAR(m.mean, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(m.var, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(Samplers, GammaMoments) {
  const StreamKey key = make_key(12, 0);
  const int n = 100000;
  for (double shape : {0.2, 0.9, 1.0, 3.5, 250.0}) {
    const auto m = sample_moments(n, [&](std::uint32_t i) { return gamma_at(key, shape, i, 0, 0, 1); });
    EXPECT_NEAR(m.mean, shape, 5.0 * std::sqrt(shape / n)) << shape;
    EXPECT_NEAR(m.var / shape, 1.0, 0.05) << shape;
  }
}

TEST(Samplers, BetaMoments) {
  const StreamKey key = make_key(13, 0);
  const int n = 100000;
  const std::pair<double, double> shapes[] = {{1, 1}, {2, 1}, {0.5, 0.5}, {10, 390}, {0.1, 3}};
  for (const auto& [a, b] : shapes) {
    const double mean = a / (a + b);
    const double var = a * b / ((a + b) * (a + b) * (a + b + 1));
    const auto m = sample_moments(n, [&](std::uint32_t i) { return beta_at(key, a, b, i, 0, 1); });
    EXPECT_NEAR(m.mean, mean, 5.0 * std::sqrt(var / n)) << a << "," << b;
    EXPECT_NEAR(m.var / var, 1.0, 0.05) << a << "," << b;
  }
}

TEST(Samplers, FillMatchesPointwise) {
  const StreamKey key = make_key(5, 5);
  for (auto isa : {kernels::Isa::Scalar, kernels::Isa::Avx2}) {
    if (!kernels::isa_supported(isa)) continue;
    const auto& t = kernels::table(isa);
    std::vector<double> z(37), b(37);
    t.normal_fill(key, 2, 3, 4, z);
    t.beta_fill(key, 0.7, 12.0, 3, 4, b);
    for (std::uint32_t i = 0; i < 37; ++i) {
      EXPECT_EQ(z[i], normal_at(key, {i, 2, 3, 4}));
      EXPECT_EQ(b[i], beta_at(key, 0.7, 12.0, i, 3, 4));
    }
  }
}
