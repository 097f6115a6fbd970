// Scalar reference kernels. Reductions accumulate in four interleaved partial
// sums, the same order as the 4-wide SIMD kernels.

#include <array>
#include <cmath>

#include "ebshrink/kernels.hpp"
#include "kernels/lanes_scalar.hpp"
#include "kernels/generic.hpp"
#include "kernels/tables.hpp"

namespace ebshrink::kernels {
namespace {

template <class Term>
double blocked_sum(std::size_t n, Term term) {
  std::array<double, 4> acc{0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) acc[i & 3] += term(i);
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double sum(std::span<const double> x) {
  return blocked_sum(x.size(), [&](std::size_t i) { return x[i]; });
}

double sum_sq_dev(std::span<const double> x, double center) {
  return blocked_sum(x.size(), [&](std::size_t i) {
    const double d = x[i] - center;
    return d * d;
  });
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  return blocked_sum(a.size(), [&](std::size_t i) {
    const double d = a[i] - b[i];
    return d * d;
  });
}

void shrink(const ShrinkParams& params, const ShrinkColumns& cols) {
  for (std::size_t i = 0; i < cols.means.size(); ++i) {
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
  for (std::size_t i = 0; i < truth.size(); ++i) {
    counts[i] += (lo[i] <= truth[i] && truth[i] <= hi[i]) ? 1 : 0;
  }
}

void normal_fill(StreamKey key, std::uint32_t word1, std::uint32_t word2, std::uint32_t word3,
                 std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = normal_lanes<SF, SU>(key.lo, key.hi, i, word1, word2, word3);
  }
}

void beta_fill(StreamKey key, double alpha, double beta, std::uint32_t word2, std::uint32_t word3,
               std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = beta_lanes<SF, SU>(key.lo, key.hi, i, alpha, beta, word2, word3);
  }
}

void argmax_rows(std::span<const double> values, std::size_t rows,
                 std::span<std::uint32_t> best, std::span<std::uint8_t> tied) {
  const std::size_t cols = best.size();
  for (std::size_t c = 0; c < cols; ++c) {
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

const KernelTable& scalar_table() {
  static const KernelTable t{Isa::Scalar, sum,          sum_sq_dev,  sum_sq_diff, shrink,
                             count_covered, normal_fill, beta_fill, argmax_rows};
  return t;
}

}  // namespace ebshrink::kernels
