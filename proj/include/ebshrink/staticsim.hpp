#pragma once

// Parametric-bootstrap study of shrunk vs raw means around a fixed truth.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ebshrink/estimator.hpp"
#include "ebshrink/rng.hpp"

namespace ebshrink {

// An arm's full-sample summary, treated as the truth.
struct TruthArm {
  std::string arm_id;
  std::uint64_t n = 1;
  double mean = 0.0;
  double std_err = 0.0;
};

std::vector<TruthArm> truth_from_summaries(std::span<const ArmSummary> arms);

struct StaticConfig {
  double downsample_fraction = 0.2;
  std::uint32_t n_replications = 1000;
  double level = 0.95;
  std::uint64_t seed = 1;
  std::vector<std::uint32_t> subsample_arm_counts;
  DofStyle dof_style = DofStyle::KMinus3;

  void validate() const;
};

// max(1, round(fraction * n)).
std::uint64_t downsampled_size(std::uint64_t n, double fraction);

// One bootstrap draw: n' = downsampled_size(n), se' = se * sqrt(n / n'),
// mean ~ Normal(true mean, se'^2). Arm k uses counter {k, 0, replication, Bootstrap}.
std::vector<ArmSummary> bootstrap_replicate(std::span<const TruthArm> truth, double fraction,
                                            StreamKey key, std::uint32_t replication);

struct MseEstimate {
  double mse = 0.0;
  double std_err = 0.0;
};

// Mean over replications of the summed squared error, with the standard
// error of that mean. estimates[r][k] is replication r's estimate of arm k.
MseEstimate compound_mse(std::span<const double> truth, const std::vector<std::vector<double>>& estimates);

// Mean and standard error from per-replication compound squared errors.
MseEstimate mse_from_replications(std::span<const double> compound_sq_err);

struct RatioEstimate {
  // NaN with defined == false when the denominator MSE is 0.
  double ratio = 0.0;
  double std_err = 0.0;
  bool defined = true;

  double lower95() const;
  double upper95() const;
};

// Ratio of mean numerator to mean denominator with a delta-method standard
// error from paired replications.
RatioEstimate mse_ratio(std::span<const double> numerator, std::span<const double> denominator);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

struct CoverageRate {
  double rate = 0.0;
  double std_err = 0.0;
};

CoverageRate coverage_rate(std::uint64_t covered, std::uint64_t total);

// Per-arm share of replications whose interval contains the truth, ends
// included. intervals[r][k] belongs to replication r and arm k.
std::vector<CoverageRate> coverage(std::span<const double> truth,
                                   const std::vector<std::vector<Interval>>& intervals);

struct StaticArmReport {
  std::string arm_id;
  double true_mean = 0.0;
  double std_err = 0.0;
  // (mean - grand mean) / sd of the true means.
  double standardized_effect = 0.0;
  // Shrinkage applied to the full-sample summaries.
  double raw_effect = 0.0;
  double shrunk_effect = 0.0;
  double xi = 0.0;
  double mse_js = 0.0;
  double mse_raw = 0.0;
  // mse_js / mse_raw; NaN when mse_raw is 0.
  double mse_ratio = 0.0;
  CoverageRate coverage_raw;
  CoverageRate coverage_js;
};

struct ArmsCurvePoint {
  std::uint32_t arms = 0;
  MseEstimate js;
  MseEstimate raw;
  RatioEstimate ratio;
};

struct StaticReport {
  PooledStats pooled;
  std::uint32_t replications = 0;
  MseEstimate compound_js;
  MseEstimate compound_raw;
  RatioEstimate compound_ratio;
  // Share of arms whose JS MSE is below their raw MSE.
  double fraction_improved = 0.0;
  // False when the JS variance is undefined (dof <= 0); JS coverage is then 0.
  bool js_intervals_defined = true;
  std::vector<StaticArmReport> arms;
  std::vector<ArmsCurvePoint> arms_curve;
};

// `stream` separates experiments that share a seed.
StaticReport run_static(std::span<const TruthArm> truth, const StaticConfig& config,
                        unsigned threads = 1, std::uint64_t stream = 0);

// For each K in config.subsample_arm_counts: every replication draws a fresh
// K-arm subsample without replacement and one bootstrap draw of it.
std::vector<ArmsCurvePoint> arms_curve(std::span<const TruthArm> truth, const StaticConfig& config,
                                       unsigned threads = 1, std::uint64_t stream = 0);

}  // namespace ebshrink
