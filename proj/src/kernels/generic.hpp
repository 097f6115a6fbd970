#pragma once

// Lane-generic kernel bodies. Instantiated once with the scalar lane types
// and once per SIMD lane type. Every variant runs the same sequence of
// correctly rounded operations.
//
// Requires the lane overload set (fmadd, select, as_bits, ...) to be
// declared before inclusion.

#include <cmath>
#include <cstdint>

#include "ebshrink/kernels.hpp"

namespace ebshrink::kernels {
namespace {

constexpr std::uint64_t kLow32 = 0xffffffffULL;
constexpr std::uint64_t kPhiloxM0 = 0xD2511F53ULL;
constexpr std::uint64_t kPhiloxM1 = 0xCD9E8D57ULL;
constexpr std::uint64_t kPhiloxW0 = 0x9E3779B9ULL;
constexpr std::uint64_t kPhiloxW1 = 0xBB67AE85ULL;

constexpr double kTwoPow52 = 4503599627370496.0;
constexpr double kTwoPowMinus32 = 0x1p-32;
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kLog2e = 1.44269504088896338700;
constexpr double kTwoPi = 6.28318530717958647692;

// Counter words are carried in 64-bit lanes holding values < 2^32.
template <class U>
inline void philox4x32_10(U (&c)[4], U k0, U k1) {
  const U m0(kPhiloxM0), m1(kPhiloxM1), w0(kPhiloxW0), w1(kPhiloxW1), low(kLow32);
  for (int round = 0; round < 10; ++round) {
    if (round != 0) {
      k0 = (k0 + w0) & low;
      k1 = (k1 + w1) & low;
    }
    const U p0 = mul32(m0, c[0]);
    const U p1 = mul32(m1, c[2]);
    const U n0 = (p1 >> 32) ^ c[1] ^ k0;
    const U n2 = (p0 >> 32) ^ c[3] ^ k1;
    c[0] = n0;
    c[1] = p1 & low;
    c[2] = n2;
    c[3] = p0 & low;
  }
}

// Exact conversion of an integer below 2^52.
template <class F, class U>
inline F small_to_double(U w) {
  return from_bits(w | U(0x4330000000000000ULL)) - F(kTwoPow52);
}

// Inverse of small_to_double for non-negative integral values below 2^52.
template <class F, class U>
inline U double_to_small(F x) {
  return as_bits(x + F(kTwoPow52)) & U(0x000fffffffffffffULL);
}

template <class F, class U>
inline F unit_open(U w) {
  return (small_to_double<F, U>(w) + F(0.5)) * F(kTwoPowMinus32);
}

// Natural log for positive normal inputs.
template <class F, class U>
inline F log_pos(F x) {
  const U bits = as_bits(x);
  F e = small_to_double<F, U>(bits >> 52) - F(1023.0);
  F m = from_bits((bits & U(0x000fffffffffffffULL)) | U(0x3ff0000000000000ULL));
  const auto big = m > F(kSqrt2);
  m = select(big, m * F(0.5), m);
  e = select(big, e + F(1.0), e);
  const F t = (m - F(1.0)) / (m + F(1.0));
  const F t2 = t * t;
  // 2 atanh(t) = 2t (1 + t^2/3 + t^4/5 + ...), |t| <= 0.1716
  F p(1.0 / 23.0);
  p = fmadd(p, t2, F(1.0 / 21.0));
  p = fmadd(p, t2, F(1.0 / 19.0));
  p = fmadd(p, t2, F(1.0 / 17.0));
  p = fmadd(p, t2, F(1.0 / 15.0));
  p = fmadd(p, t2, F(1.0 / 13.0));
  p = fmadd(p, t2, F(1.0 / 11.0));
  p = fmadd(p, t2, F(1.0 / 9.0));
  p = fmadd(p, t2, F(1.0 / 7.0));
  p = fmadd(p, t2, F(1.0 / 5.0));
  p = fmadd(p, t2, F(1.0 / 3.0));
  const F lm = (t + t) * fmadd(p, t2, F(1.0));
  return fmadd(e, F(kLn2Hi), fmadd(e, F(kLn2Lo), lm));
}

// e^x, argument clamped to [-700, 700].
template <class F, class U>
inline F exp_clamped(F x) {
  x = vmax(vmin(x, F(700.0)), F(-700.0));
  const F k = vfloor(fmadd(x, F(kLog2e), F(0.5)));
  F r = fmadd(k, F(-kLn2Hi), x);
  r = fmadd(k, F(-kLn2Lo), r);
  F p(1.0 / 6227020800.0);  // 1/13!
  p = fmadd(p, r, F(1.0 / 479001600.0));
  p = fmadd(p, r, F(1.0 / 39916800.0));
  p = fmadd(p, r, F(1.0 / 3628800.0));
  p = fmadd(p, r, F(1.0 / 362880.0));
  p = fmadd(p, r, F(1.0 / 40320.0));
  p = fmadd(p, r, F(1.0 / 5040.0));
  p = fmadd(p, r, F(1.0 / 720.0));
  p = fmadd(p, r, F(1.0 / 120.0));
  p = fmadd(p, r, F(1.0 / 24.0));
  p = fmadd(p, r, F(1.0 / 6.0));
  p = fmadd(p, r, F(0.5));
  p = fmadd(p, r, F(1.0));
  p = fmadd(p, r, F(1.0));
  const U biased = double_to_small<F, U>(k + F(1023.0));
  return p * from_bits(biased << 52);
}

// sin(2 pi u) and cos(2 pi u) for u in [0, 1].
template <class F, class U>
inline void sincos_two_pi(F u, F& sin_out, F& cos_out) {
  const F q = vfloor(fmadd(u, F(4.0), F(0.5)));
  const F f = fmadd(q, F(-0.25), u);
  const F th = f * F(kTwoPi);
  const F th2 = th * th;

  F s(1.0 / 355687428096000.0);  // 1/17!
  s = fmadd(s, th2, F(-1.0 / 1307674368000.0));
  s = fmadd(s, th2, F(1.0 / 6227020800.0));
  s = fmadd(s, th2, F(-1.0 / 39916800.0));
  s = fmadd(s, th2, F(1.0 / 362880.0));
  s = fmadd(s, th2, F(-1.0 / 5040.0));
  s = fmadd(s, th2, F(1.0 / 120.0));
  s = fmadd(s, th2, F(-1.0 / 6.0));
  s = fmadd(s, th2, F(1.0));
  s = s * th;

  F c(1.0 / 20922789888000.0);  // 1/16!
  c = fmadd(c, th2, F(-1.0 / 87178291200.0));
  c = fmadd(c, th2, F(1.0 / 479001600.0));
  c = fmadd(c, th2, F(-1.0 / 3628800.0));
  c = fmadd(c, th2, F(1.0 / 40320.0));
  c = fmadd(c, th2, F(-1.0 / 720.0));
  c = fmadd(c, th2, F(1.0 / 24.0));
  c = fmadd(c, th2, F(-0.5));
  c = fmadd(c, th2, F(1.0));

  // quadrant q: cos = c, -s, -c, s and sin = s, c, -s, -c
  const U quadrant = double_to_small<F, U>(q) & U(3);
  const auto odd = equal(quadrant & U(1), U(1));
  const auto cos_neg = mask_or(equal(quadrant, U(1)), equal(quadrant, U(2)));
  const auto sin_neg = mask_or(equal(quadrant, U(2)), equal(quadrant, U(3)));
  const F cr = select(odd, s, c);
  const F sr = select(odd, c, s);
  cos_out = select(cos_neg, F(0.0) - cr, cr);
  sin_out = select(sin_neg, F(0.0) - sr, sr);
}

template <class F, class U>
inline F cos_two_pi(F u) {
  F s, c;
  sincos_two_pi<F, U>(u, s, c);
  return c;
}

template <class F, class U>
inline F box_muller(U w0, U w1) {
  const F u1 = unit_open<F, U>(w0);
  const F u2 = unit_open<F, U>(w1);
  return vsqrt(F(-2.0) * log_pos<F, U>(u1)) * cos_two_pi<F, U>(u2);
}

template <class F, class U>
inline F normal_lanes(U k0, U k1, U index, U word1, U word2, U word3) {
  U c[4] = {index, word1, word2, word3};
  philox4x32_10(c, k0, k1);
  return box_muller<F, U>(c[0], c[1]);
}

// Marsaglia-Tsang acceptance state for one gamma variate per lane. Shapes
// below one are boosted: G(a) = G(a + 1) U^(1/a), with U read from a block
// that does not depend on the number of attempts.
template <class F>
struct GammaLane {
  using M = decltype(F(0.0) < F(0.0));

  double shape, d, c;
  F result{0.0};
  M done = F(0.0) > F(1.0);

  explicit GammaLane(double s)
      : shape(s), d((s < 1.0 ? s + 1.0 : s) - 1.0 / 3.0), c(1.0 / std::sqrt(9.0 * d)) {}

  template <class U>
  void attempt(F z, F u) {
    const F v1 = fmadd(F(c), z, F(1.0));
    const M positive = v1 > F(0.0);
    const F vs = select(positive, v1, F(1.0));
    const F v = vs * vs * vs;
    const F z2 = z * z;
    const M squeeze = u < F(1.0) - F(0.0331) * z2 * z2;
    M ok = mask_and(positive, squeeze);
    if (!all_of(mask_or(ok, done))) {
      const M full = log_pos<F, U>(u) <
                     fmadd(F(0.5), z2, F(d) * (F(1.0) - v + log_pos<F, U>(v)));
      ok = mask_and(positive, mask_or(squeeze, full));
    }
    result = select(mask_andnot(ok, done), F(d) * v, result);
    done = mask_or(done, ok);
  }

  template <class U>
  F finish(U k0, U k1, U index, std::uint32_t slot, U word2, U word3) const {
    if (shape >= 1.0) return result;
    U ctr[4] = {index, U(0x80000000ULL | slot), word2, word3};
    philox4x32_10(ctr, k0, k1);
    const F u = unit_open<F, U>(ctr[0]);
    return result * exp_clamped<F, U>(log_pos<F, U>(u) / F(shape));
  }
};

// Gamma(shape, 1); attempt j reads block {index, j << 1 | slot, word2, word3}.
template <class F, class U>
inline F gamma_lanes(U k0, U k1, U index, double shape, std::uint32_t slot, U word2,
                     U word3) {
  GammaLane<F> g(shape);
  U attempt(0);
  for (;;) {
    U ctr[4] = {index, (attempt << 1) | U(slot), word2, word3};
    philox4x32_10(ctr, k0, k1);
    g.template attempt<U>(box_muller<F, U>(ctr[0], ctr[1]), unit_open<F, U>(ctr[2]));
    if (all_of(g.done)) break;
    attempt = attempt + select(g.done, U(0), U(1));
  }
  return g.finish(k0, k1, index, slot, word2, word3);
}

// Beta(alpha, beta) = G_a / (G_a + G_b). Both gammas share each attempt
// block {index, j, word2, word3}: one Box-Muller pair supplies both normals
// and words 2 and 3 both acceptance uniforms.
template <class F, class U>
inline F beta_lanes(U k0, U k1, U index, double alpha, double beta, U word2, U word3) {
  GammaLane<F> ga(alpha);
  GammaLane<F> gb(beta);
  U attempt(0);
  for (;;) {
    U ctr[4] = {index, attempt, word2, word3};
    philox4x32_10(ctr, k0, k1);
    const F radius = vsqrt(F(-2.0) * log_pos<F, U>(unit_open<F, U>(ctr[0])));
    F s, c;
    sincos_two_pi<F, U>(unit_open<F, U>(ctr[1]), s, c);
    ga.template attempt<U>(radius * c, unit_open<F, U>(ctr[2]));
    gb.template attempt<U>(radius * s, unit_open<F, U>(ctr[3]));
    const auto done = mask_and(ga.done, gb.done);
    if (all_of(done)) break;
    attempt = attempt + select(done, U(0), U(1));
  }
  const F a = ga.finish(k0, k1, index, 0, word2, word3);
  const F b = gb.finish(k0, k1, index, 1, word2, word3);
  const F total = a + b;
  const auto empty = total == F(0.0);
  return select(empty, F(0.5), a / select(empty, F(1.0), total));
}

}  // namespace
}  // namespace ebshrink::kernels

namespace ebshrink::kernels {
namespace {

template <class F>
struct ShrinkLane {
  F xi, estimate, var_naive, var_full_appendix, var_full_main, var_mixture;
};

// Positive-part James-Stein shrinkage of one lane of arms. The special cases
// (no degrees of freedom, zero dispersion) depend only on pooled quantities,
// so every lane takes the same branch.
template <class F>
inline ShrinkLane<F> shrink_lanes(F mean, F se_sq, const ShrinkParams& p) {
  ShrinkLane<F> out;
  if (p.dof <= 0.0) {
    out.xi = F(0.0);
  } else if (p.dispersion == 0.0) {
    out.xi = F(1.0);
  } else {
    out.xi = vmin(se_sq * F(p.dof) / F(p.dispersion), F(1.0));
  }
  const F gm(p.grand_mean);
  const F dev = mean - gm;
  const F keep = F(1.0) - out.xi;
  const F est = select(out.xi == F(0.0), mean, gm + keep * dev);
  out.estimate = vmin(vmax(est, vmin(mean, gm)), vmax(mean, gm));

  const F dev_sq = dev * dev;
  out.var_naive = keep * se_sq;
  const F ensemble = out.xi * se_sq / F(p.arm_count);
  out.var_mixture = out.var_naive + ensemble + out.xi * keep * dev_sq;
  if (p.dof > 0.0) {
    const F dispersion_term = F(2.0) * out.xi * out.xi * dev_sq / F(p.dof);
    out.var_full_appendix = out.var_naive + ensemble + dispersion_term;
    out.var_full_main =
        out.var_naive + out.xi * F(p.dispersion) / F(p.arm_count) + dispersion_term;
  } else {
    out.var_full_appendix = F(__builtin_nan(""));
    out.var_full_main = F(__builtin_nan(""));
  }
  return out;
}

}  // namespace
}  // namespace ebshrink::kernels
