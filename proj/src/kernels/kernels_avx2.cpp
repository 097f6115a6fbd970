// AVX2 + FMA kernels. Built with -mavx2 -mfma and only reached through the
// dispatch table after a CPUID check. Tails shorter than one vector go through
// the scalar instantiation of the same generic body.

#include <immintrin.h>

#include <array>

#include "ebshrink/kernels.hpp"
#include "kernels/lanes_scalar.hpp"
#include "kernels/lanes_avx2.hpp"
#include "kernels/generic.hpp"
#include "kernels/tables.hpp"

namespace ebshrink::kernels {
namespace {

inline VF load(const double* p) { return _mm256_loadu_pd(p); }
inline void store(double* p, VF x) { _mm256_storeu_pd(p, x.v); }

inline double finish(__m256d acc, std::span<const double> tail_terms, std::size_t tail_start) {
  alignas(32) std::array<double, 4> lanes;
  _mm256_store_pd(lanes.data(), acc);
  for (std::size_t j = 0; j < tail_terms.size(); ++j) lanes[(tail_start + j) & 3] += tail_terms[j];
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double sum(std::span<const double> x) {
  const std::size_t n = x.size();
  const std::size_t n4 = n & ~std::size_t{3};
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n4; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(&x[i]));
  return finish(acc, x.subspan(n4), n4);
}

double sum_sq_dev(std::span<const double> x, double center) {
  const std::size_t n = x.size();
  const std::size_t n4 = n & ~std::size_t{3};
  const __m256d c = _mm256_set1_pd(center);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(&x[i]), c);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  std::array<double, 3> tail{};
  for (std::size_t i = n4; i < n; ++i) {
    const double d = x[i] - center;
    tail[i - n4] = d * d;
  }
  return finish(acc, std::span<const double>(tail.data(), n - n4), n4);
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const std::size_t n4 = n & ~std::size_t{3};
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(&a[i]), _mm256_loadu_pd(&b[i]));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  std::array<double, 3> tail{};
  for (std::size_t i = n4; i < n; ++i) {
    const double d = a[i] - b[i];
    tail[i - n4] = d * d;
  }
  return finish(acc, std::span<const double>(tail.data(), n - n4), n4);
}

void shrink(const ShrinkParams& params, const ShrinkColumns& cols) {
  const std::size_t n = cols.means.size();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const auto r = shrink_lanes<VF>(load(&cols.means[i]), load(&cols.std_err_sq[i]), params);
    store(&cols.xi[i], r.xi);
    store(&cols.estimate[i], r.estimate);
    store(&cols.var_naive[i], r.var_naive);
    store(&cols.var_full_appendix[i], r.var_full_appendix);
    store(&cols.var_full_main[i], r.var_full_main);
    store(&cols.var_mixture[i], r.var_mixture);
  }
  for (std::size_t i = n4; i < n; ++i) {
    const auto r = shrink_lanes<SF>(cols.means[i], cols.std_err_sq[i], params);
    cols.xi[i] = r.xi;
    cols.estimate[i] = r.estimate;
    cols.var_naive[i] = r.var_naive;
    cols.var_full_appendix[i] = r.var_full_appendix;
    cols.var_full_main[i] = r.var_full_main;
    cols.var_mixture[i] = r.var_mixture;
  }
}

void count_covered(std::span<const double> truth, std::span<const double> lo,
                   std::span<const double> hi, std::span<std::uint64_t> counts) {
  const std::size_t n = truth.size();
  const std::size_t n4 = n & ~std::size_t{3};
  const __m256i one = _mm256_set1_epi64x(1);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d t = _mm256_loadu_pd(&truth[i]);
    const __m256d in = _mm256_and_pd(_mm256_cmp_pd(_mm256_loadu_pd(&lo[i]), t, _CMP_LE_OQ),
                                     _mm256_cmp_pd(t, _mm256_loadu_pd(&hi[i]), _CMP_LE_OQ));
    auto* dst = reinterpret_cast<__m256i*>(&counts[i]);
    const __m256i inc = _mm256_and_si256(_mm256_castpd_si256(in), one);
    _mm256_storeu_si256(dst, _mm256_add_epi64(_mm256_loadu_si256(dst), inc));
  }
  for (std::size_t i = n4; i < n; ++i) {
    counts[i] += (lo[i] <= truth[i] && truth[i] <= hi[i]) ? 1 : 0;
  }
}

void normal_fill(StreamKey key, std::uint32_t word1, std::uint32_t word2, std::uint32_t word3,
                 std::span<double> out) {
  const std::size_t n = out.size();
  const std::size_t n4 = n & ~std::size_t{3};
  const VU k0(key.lo), k1(key.hi), w1(word1), w2(word2), w3(word3);
  for (std::size_t i = 0; i < n4; i += 4) {
    store(&out[i], normal_lanes<VF, VU>(k0, k1, iota4(i), w1, w2, w3));
  }
  for (std::size_t i = n4; i < n; ++i) {
    out[i] = normal_lanes<SF, SU>(key.lo, key.hi, i, word1, word2, word3);
  }
}

void beta_fill(StreamKey key, double alpha, double beta, std::uint32_t word2, std::uint32_t word3,
               std::span<double> out) {
  const std::size_t n = out.size();
  const std::size_t n4 = n & ~std::size_t{3};
  const VU k0(key.lo), k1(key.hi), w2(word2), w3(word3);
  for (std::size_t i = 0; i < n4; i += 4) {
    store(&out[i], beta_lanes<VF, VU>(k0, k1, iota4(i), alpha, beta, w2, w3));
  }
  for (std::size_t i = n4; i < n; ++i) {
    out[i] = beta_lanes<SF, SU>(key.lo, key.hi, i, alpha, beta, word2, word3);
  }
}

void argmax_rows(std::span<const double> values, std::size_t rows,
                 std::span<std::uint32_t> best, std::span<std::uint8_t> tied) {
  const std::size_t cols = best.size();
  const std::size_t c4 = cols & ~std::size_t{3};
  for (std::size_t c = 0; c < c4; c += 4) {
    __m256d top = _mm256_loadu_pd(&values[c]);
    __m256d arg = _mm256_setzero_pd();
    __m256d tie = _mm256_setzero_pd();
    for (std::size_t r = 1; r < rows; ++r) {
      const __m256d v = _mm256_loadu_pd(&values[r * cols + c]);
      const __m256d gt = _mm256_cmp_pd(v, top, _CMP_GT_OQ);
      const __m256d eq = _mm256_cmp_pd(v, top, _CMP_EQ_OQ);
      top = _mm256_blendv_pd(top, v, gt);
      arg = _mm256_blendv_pd(arg, _mm256_set1_pd(static_cast<double>(r)), gt);
      tie = _mm256_andnot_pd(gt, _mm256_or_pd(tie, eq));
    }
    _mm_storeu_si128(reinterpret_cast<__m128i*>(&best[c]), _mm256_cvtpd_epi32(arg));
    const int bits = _mm256_movemask_pd(tie);
    for (int j = 0; j < 4; ++j) tied[c + j] = static_cast<std::uint8_t>((bits >> j) & 1);
  }
  for (std::size_t c = c4; c < cols; ++c) {
    double top = values[c];
    std::uint32_t arg = 0;
    bool tie = false;
    for (std::size_t r = 1; r < rows; ++r) {
      const double v = values[r * cols + c];
      if (v > top) {
        top = v;
        arg = static_cast<std::uint32_t>(r);
        tie = false;
      } else if (v == top) {
        tie = true;
      }
    }
    best[c] = arg;
    tied[c] = tie ? 1 : 0;
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{Isa::Avx2,    sum,         sum_sq_dev, sum_sq_diff, shrink,
                             count_covered, normal_fill, beta_fill,  argmax_rows};
  return t;
}

}  // namespace ebshrink::kernels
