#pragma once

// Positive-part James-Stein shrinkage for many-armed experiments.
//
// Given per-arm sample means m_k with standard errors sigma_k, every arm is
// pulled toward the grand mean m-bar by the factor
//
//   xi_k = min(sigma_k^2 (K - 3) / s^2, 1),   s^2 = sum_k (m_k - m-bar)^2
//
// and reported with one of several variance estimates: the naive
// (1 - xi) sigma^2, the full posterior approximation that also accounts for
// estimating m-bar and s^2, and the variance of the two-component mixture
// reading of the estimator.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ebshrink {

struct ArmSummary {
  std::string arm_id;
  std::uint64_t n = 1;
  double mean = 0.0;
  double std_err = 0.0;
  // Present for Bernoulli outcomes; then mean == successes / n.
  std::optional<std::uint64_t> successes;

  static ArmSummary from_counts(std::string arm_id, std::uint64_t n, std::uint64_t successes);
};

// Throws InvalidInput when the summary violates its invariants.
void validate(const ArmSummary& arm);

// Numerator degrees of freedom of the shrinkage factor. KMinus1 corresponds
// to the scale-invariant prior p(tau^2) ~ 1/tau^2.
enum class DofStyle { KMinus3, KMinus1 };

// Middle term of the full variance: xi sigma^2 / K (Appendix, the default and
// the form the derivation supports) or xi s^2 / K as printed in the main text.
enum class FullVarianceForm { Appendix, MainText };

// Which variance the reported interval uses.
enum class IntervalVariance { Full, Naive, Mixture };

// PerArm uses each arm's own sigma_k^2; Pooled replaces every sigma_k^2 by
// their average (the homoskedastic model).
enum class NoiseModel { PerArm, Pooled };

std::string_view to_string(DofStyle s);
std::string_view to_string(FullVarianceForm f);
std::string_view to_string(IntervalVariance v);
std::string_view to_string(NoiseModel m);

struct PooledStats {
  std::size_t k = 0;
  double grand_mean = 0.0;
  // Sum of squared deviations, not divided by K.
  double dispersion = 0.0;
  DofStyle dof_style = DofStyle::KMinus3;

  // K - 3 or K - 1 as a signed count.
  double dof() const;
};

PooledStats pooled_stats(std::span<const double> means, DofStyle style = DofStyle::KMinus3);
PooledStats pooled_stats(std::span<const ArmSummary> arms, DofStyle style = DofStyle::KMinus3);

// clamp(std_err_sq * dof / dispersion, 0, 1); 0 when dof <= 0, otherwise 1
// when dispersion is 0.
double shrinkage_factor(double std_err_sq, const PooledStats& pooled);

double variance_naive(double std_err_sq, double xi);

// Throws NumericalDegeneracy when dof <= 0 (K <= 3 under KMinus3).
double variance_full(double std_err_sq, double xi, double deviation, const PooledStats& pooled,
                     FullVarianceForm form = FullVarianceForm::Appendix);

double variance_mixture(double std_err_sq, double xi, double deviation, std::size_t k);

// Standard normal quantile (Acklam's rational approximation refined with one
// Halley step).
double normal_quantile(double p);

// z such that a two-sided normal interval has coverage `level`.
double two_sided_z(double level);

struct ShrinkageOptions {
  DofStyle dof_style = DofStyle::KMinus3;
  double level = 0.95;
  FullVarianceForm full_form = FullVarianceForm::Appendix;
  IntervalVariance interval = IntervalVariance::Full;
  NoiseModel noise = NoiseModel::PerArm;
};

struct ShrinkageResult {
  std::string arm_id;
  double raw_mean = 0.0;
  double std_err = 0.0;
  double xi = 0.0;
  double estimate = 0.0;
  double var_naive = 0.0;
  // Empty when the full variance is undefined (dof <= 0).
  std::optional<double> var_full;
  double var_mixture = 0.0;
  // Interval from options.interval; empty when that variance is undefined.
  std::optional<double> ci_low;
  std::optional<double> ci_high;

  std::optional<double> interval_variance(IntervalVariance which) const;
};

struct ShrinkageReport {
  PooledStats pooled;
  ShrinkageOptions options;
  // sigma^2 used for every arm under NoiseModel::Pooled.
  std::optional<double> pooled_std_err_sq;
  std::vector<ShrinkageResult> arms;

  bool full_variance_defined() const { return pooled.dof() > 0.0; }
};

ShrinkageReport js_estimate(std::span<const ArmSummary> arms, const ShrinkageOptions& options = {});

// Column form used by the simulators. Fills every column for the given means
// and per-arm sigma^2; var_full_* hold NaN when dof <= 0.
struct ShrinkageColumns {
  std::vector<double> xi, estimate, var_naive, var_full_appendix, var_full_main, var_mixture;

  void resize(std::size_t n);
};

PooledStats js_columns(std::span<const double> means, std::span<const double> std_err_sq,
                       DofStyle style, ShrinkageColumns& out);

}  // namespace ebshrink
