// Scalar and SIMD kernels must agree bit for bit.

#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <vector>

#include "ebshrink/kernels.hpp"

using namespace ebshrink;
using kernels::Isa;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

class KernelEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!kernels::isa_supported(Isa::Avx2)) GTEST_SKIP() << "no AVX2 on this machine";
  }
  const kernels::KernelTable& s = kernels::table(Isa::Scalar);
  const kernels::KernelTable& v = kernels::table(Isa::Avx2);
};

std::vector<double> random_vec(std::size_t n, std::uint64_t seed, double scale = 10.0) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> out(n);
  for (auto& x : out) x = d(g);
  return out;
}

}  // namespace

TEST_F(KernelEquivalence, Reductions) {
  for (std::size_t n = 0; n < 67; ++n) {
    const auto a = random_vec(n, n);
    const auto b = random_vec(n, n + 1000);
    EXPECT_TRUE(same_bits(s.sum(a), v.sum(a))) << n;
    EXPECT_TRUE(same_bits(s.sum_sq_dev(a, 0.37), v.sum_sq_dev(a, 0.37))) << n;
    EXPECT_TRUE(same_bits(s.sum_sq_diff(a, b), v.sum_sq_diff(a, b))) << n;
  }
}

TEST_F(KernelEquivalence, Shrink) {
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 13u, 64u, 101u}) {
    const auto m = random_vec(n, 7 * n);
    auto se = random_vec(n, 9 * n, 1.0);
    for (auto& x : se) x = x * x;
    if (n > 2) se[1] = 0.0;
    for (double disp : {0.0, 1e-3, 50.0, 1e6}) {
      for (double dof : {-1.0, 0.0, 1.0, static_cast<double>(n) - 3.0}) {
        const kernels::ShrinkParams p{0.25, disp, dof, n};
        std::vector<double> out_s(6 * n), out_v(6 * n);
        auto cols = [&](std::vector<double>& o) {
          std::span<double> sp(o);
          return kernels::ShrinkColumns{m, se, sp.subspan(0, n), sp.subspan(n, n), sp.subspan(2 * n, n),
                                        sp.subspan(3 * n, n), sp.subspan(4 * n, n), sp.subspan(5 * n, n)};
        };
        s.shrink(p, cols(out_s));
        v.shrink(p, cols(out_v));
        for (std::size_t i = 0; i < out_s.size(); ++i) {
          ASSERT_TRUE(same_bits(out_s[i], out_v[i])) << "n=" << n << " disp=" << disp << " dof=" << dof << " i=" << i;
        }
      }
    }
  }
}

TEST_F(KernelEquivalence, CountCovered) {
  for (std::size_t n = 0; n < 23; ++n) {
    const auto t = random_vec(n, n);
    auto lo = random_vec(n, n + 1);
    auto hi = lo;
    for (std::size_t i = 0; i < n; ++i) hi[i] = lo[i] + 3.0 * (i % 5);
    if (n > 3) lo[3] = hi[3] = t[3];
    std::vector<std::uint64_t> cs(n, 1), cv(n, 1);
    s.count_covered(t, lo, hi, cs);
    v.count_covered(t, lo, hi, cv);
    EXPECT_EQ(cs, cv);
  }
}

TEST_F(KernelEquivalence, NormalFill) {
  const StreamKey key = make_key(42, 7);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 1000u}) {
    std::vector<double> a(n), b(n);
    s.normal_fill(key, 3, 9, 5, a);
    v.normal_fill(key, 3, 9, 5, b);
    for (std::size_t i = 0; i < n; ++i) ASSERT_TRUE(same_bits(a[i], b[i])) << i;
  }
}

TEST_F(KernelEquivalence, BetaFill) {
  const StreamKey key = make_key(3, 1);
  const std::pair<double, double> shapes[] = {{1, 1}, {0.3, 0.7}, {0.05, 5}, {2, 1}, {11, 391}, {1000, 1}, {2.5e4, 9e5}};
  for (const auto& [a, b] : shapes) {
    for (std::size_t n : {1u, 6u, 999u}) {
      std::vector<double> x(n), y(n);
      s.beta_fill(key, a, b, 4, 1, x);
      v.beta_fill(key, a, b, 4, 1, y);
      for (std::size_t i = 0; i < n; ++i) ASSERT_TRUE(same_bits(x[i], y[i])) << a << "," << b << " i=" << i;
    }
  }
}

TEST_F(KernelEquivalence, ArgmaxRows) {
  const std::size_t rows = 5;
  for (std::size_t cols : {1u, 4u, 9u, 33u}) {
    auto vals = random_vec(rows * cols, cols);
    for (std::size_t c = 0; c < cols; c += 3) vals[2 * cols + c] = vals[4 * cols + c] = 1e9;
    std::vector<std::uint32_t> bs(cols), bv(cols);
    std::vector<std::uint8_t> ts(cols), tv(cols);
    s.argmax_rows(vals, rows, bs, ts);
    v.argmax_rows(vals, rows, bv, tv);
    EXPECT_EQ(bs, bv);
    EXPECT_EQ(ts, tv);
    for (std::size_t c = 0; c < cols; c += 3) {
      EXPECT_EQ(bs[c], 2u);
      EXPECT_EQ(ts[c], 1u);
    }
  }
}

TEST(KernelDispatch, ScalarAlwaysAvailable) {
  EXPECT_TRUE(kernels::isa_supported(Isa::Scalar));
  EXPECT_EQ(kernels::table(Isa::Scalar).isa, Isa::Scalar);
  const Isa before = kernels::active_isa();
  kernels::set_active_isa(Isa::Scalar);
  EXPECT_EQ(kernels::active().isa, Isa::Scalar);
  kernels::set_active_isa(before);
}

TEST(KernelScalar, BlockedSumOrder) {
  // Lanes (i mod 4) are summed separately then combined as (0+1)+(2+3).
  const std::vector<double> x{1e16, 1.0, -1e16, 1.0, 1.0};
  const double lane0 = 1e16 + 1.0;
  EXPECT_EQ(kernels::table(Isa::Scalar).sum(x), (lane0 + 1.0) + (-1e16 + 1.0));
}
