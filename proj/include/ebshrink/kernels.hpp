#pragma once

// Data-parallel inner loops, each with a scalar reference implementation and
// a SIMD implementation selected at runtime. All variants of a kernel return
// bit-identical results: reductions use a fixed 4-lane blocked order, no
// operation is contracted implicitly, and transcendental functions are
// evaluated with in-house polynomials rather than the platform libm.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "ebshrink/rng.hpp"

namespace ebshrink::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa best_isa();

// Process-wide selection; defaults to best_isa(), or to the value of the
// EBSHRINK_ISA environment variable ("scalar" or "avx2") when set.
Isa active_isa();
void set_active_isa(Isa isa);

struct ShrinkParams {
  double grand_mean = 0.0;
  double dispersion = 0.0;
  // K - 3 or K - 1; non-positive disables shrinkage.
  double dof = 0.0;
  double arm_count = 0.0;
};

// Column views for the shrinkage kernel. All spans have the same length.
struct ShrinkColumns {
  std::span<const double> means;
  std::span<const double> std_err_sq;
  std::span<double> xi;
  std::span<double> estimate;
  std::span<double> var_naive;
  std::span<double> var_full_appendix;
  std::span<double> var_full_main;
  std::span<double> var_mixture;
};

struct KernelTable {
  Isa isa;

  double (*sum)(std::span<const double> x);
  // sum of (x - center)^2
  double (*sum_sq_dev)(std::span<const double> x, double center);
  // sum of (a - b)^2
  double (*sum_sq_diff)(std::span<const double> a, std::span<const double> b);

  void (*shrink)(const ShrinkParams& params, const ShrinkColumns& cols);

  // counts[i] += (lo[i] <= truth[i] && truth[i] <= hi[i])
  void (*count_covered)(std::span<const double> truth, std::span<const double> lo,
                        std::span<const double> hi, std::span<std::uint64_t> counts);

  // out[i] = normal_at(key, {i, word1, word2, word3})
  void (*normal_fill)(StreamKey key, std::uint32_t word1, std::uint32_t word2,
                      std::uint32_t word3, std::span<double> out);

  // out[i] = beta_at(key, alpha, beta, i, word2, word3)
  void (*beta_fill)(StreamKey key, double alpha, double beta, std::uint32_t word2,
                    std::uint32_t word3, std::span<double> out);

  // `values` is row-major with `rows` rows of best.size() columns. For each
  // column writes the row holding the maximum (first one on ties) and
  // whether that maximum is shared by more than one row.
  void (*argmax_rows)(std::span<const double> values, std::size_t rows,
                      std::span<std::uint32_t> best, std::span<std::uint8_t> tied);
};

const KernelTable& table(Isa isa);
const KernelTable& active();

}  // namespace ebshrink::kernels
