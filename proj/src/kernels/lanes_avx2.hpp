#pragma once

// AVX2 lane types: four doubles, four 64-bit integer lanes, full-width masks.
// Must only be included from translation units built with -mavx2 -mfma.

#include <immintrin.h>

#include <cstdint>

namespace ebshrink::kernels {
namespace {

struct VF {
  __m256d v;
  VF() = default;
  VF(__m256d x) : v(x) {}
  explicit VF(double x) : v(_mm256_set1_pd(x)) {}
};

struct VU {
  __m256i v;
  VU() = default;
  VU(__m256i x) : v(x) {}
  explicit VU(std::uint64_t x) : v(_mm256_set1_epi64x(static_cast<long long>(x))) {}
};

struct VM {
  __m256d v;
};

inline VF operator+(VF a, VF b) { return _mm256_add_pd(a.v, b.v); }
inline VF operator-(VF a, VF b) { return _mm256_sub_pd(a.v, b.v); }
inline VF operator*(VF a, VF b) { return _mm256_mul_pd(a.v, b.v); }
inline VF operator/(VF a, VF b) { return _mm256_div_pd(a.v, b.v); }
inline VM operator<(VF a, VF b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_LT_OQ)}; }
inline VM operator>(VF a, VF b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_GT_OQ)}; }
inline VM operator<=(VF a, VF b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_LE_OQ)}; }
inline VM operator==(VF a, VF b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_EQ_OQ)}; }

inline VF fmadd(VF a, VF b, VF c) { return _mm256_fmadd_pd(a.v, b.v, c.v); }
inline VF vsqrt(VF x) { return _mm256_sqrt_pd(x.v); }
inline VF vfloor(VF x) { return _mm256_floor_pd(x.v); }
// MINPD/MAXPD return the second operand unless the comparison holds, which is
// exactly the scalar a < b ? a : b.
inline VF vmin(VF a, VF b) { return _mm256_min_pd(a.v, b.v); }
inline VF vmax(VF a, VF b) { return _mm256_max_pd(a.v, b.v); }

inline VU operator+(VU a, VU b) { return _mm256_add_epi64(a.v, b.v); }
inline VU operator^(VU a, VU b) { return _mm256_xor_si256(a.v, b.v); }
inline VU operator&(VU a, VU b) { return _mm256_and_si256(a.v, b.v); }
inline VU operator|(VU a, VU b) { return _mm256_or_si256(a.v, b.v); }
inline VU operator>>(VU a, int n) { return _mm256_srl_epi64(a.v, _mm_cvtsi32_si128(n)); }
inline VU operator<<(VU a, int n) { return _mm256_sll_epi64(a.v, _mm_cvtsi32_si128(n)); }

inline VF select(VM m, VF a, VF b) { return _mm256_blendv_pd(b.v, a.v, m.v); }
inline VU select(VM m, VU a, VU b) {
  return _mm256_castpd_si256(
      _mm256_blendv_pd(_mm256_castsi256_pd(b.v), _mm256_castsi256_pd(a.v), m.v));
}

inline VM mask_and(VM a, VM b) { return {_mm256_and_pd(a.v, b.v)}; }
inline VM mask_or(VM a, VM b) { return {_mm256_or_pd(a.v, b.v)}; }
inline VM mask_andnot(VM a, VM b) { return {_mm256_andnot_pd(b.v, a.v)}; }
inline bool all_of(VM m) { return _mm256_movemask_pd(m.v) == 0xF; }

inline VU as_bits(VF x) { return _mm256_castpd_si256(x.v); }
inline VF from_bits(VU x) { return _mm256_castsi256_pd(x.v); }
inline VU mul32(VU a, VU b) { return _mm256_mul_epu32(a.v, b.v); }
inline VM equal(VU a, VU b) { return {_mm256_castsi256_pd(_mm256_cmpeq_epi64(a.v, b.v))}; }

inline VU iota4(std::uint64_t base) {
  return _mm256_add_epi64(_mm256_set1_epi64x(static_cast<long long>(base)),
                          _mm256_set_epi64x(3, 2, 1, 0));
}

}  // namespace
}  // namespace ebshrink::kernels
