#include "ebshrink/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ebshrink/error.hpp"
#include "ebshrink/kernels.hpp"

namespace ebshrink {

ArmSummary ArmSummary::from_counts(std::string arm_id, std::uint64_t n, std::uint64_t successes) {
  if (n == 0) throw InvalidInput("arm '" + arm_id + "': n must be at least 1");
  if (successes > n) throw InvalidInput("arm '" + arm_id + "': successes exceed n");
  ArmSummary a;
  a.arm_id = std::move(arm_id);
  a.n = n;
  a.successes = successes;
  a.mean = static_cast<double>(successes) / static_cast<double>(n);
  a.std_err = std::sqrt(a.mean * (1.0 - a.mean) / static_cast<double>(n));
  return a;
}

void validate(const ArmSummary& arm) {
  if (arm.n < 1) throw InvalidInput("arm '" + arm.arm_id + "': n must be at least 1");
  if (!std::isfinite(arm.mean)) throw InvalidInput("arm '" + arm.arm_id + "': mean is not finite");
  if (!(arm.std_err >= 0.0) || !std::isfinite(arm.std_err)) {
    throw InvalidInput("arm '" + arm.arm_id + "': std_err must be finite and >= 0");
  }
  if (arm.successes) {
    if (*arm.successes > arm.n) throw InvalidInput("arm '" + arm.arm_id + "': successes exceed n");
    if (arm.mean != static_cast<double>(*arm.successes) / static_cast<double>(arm.n)) {
      throw InvalidInput("arm '" + arm.arm_id + "': mean differs from successes / n");
    }
  }
}

std::string_view to_string(DofStyle s) { return s == DofStyle::KMinus3 ? "k-3" : "k-1"; }

std::string_view to_string(FullVarianceForm f) {
  return f == FullVarianceForm::Appendix ? "appendix" : "main-text";
}

std::string_view to_string(IntervalVariance v) {
  switch (v) {
    case IntervalVariance::Full:
      return "full";
    case IntervalVariance::Naive:
      return "naive";
    case IntervalVariance::Mixture:
      return "mixture";
  }
  return "full";
}

std::string_view to_string(NoiseModel m) { return m == NoiseModel::PerArm ? "per-arm" : "pooled"; }

double PooledStats::dof() const {
  const double kk = static_cast<double>(k);
  return dof_style == DofStyle::KMinus3 ? kk - 3.0 : kk - 1.0;
}

PooledStats pooled_stats(std::span<const double> means, DofStyle style) {
  if (means.size() < 2) {
    throw InvalidInput("pooled statistics need at least 2 arms, got " +
                       std::to_string(means.size()));
  }
  for (double m : means) {
    if (!std::isfinite(m)) throw InvalidInput("arm means must be finite");
  }
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  PooledStats p;
  p.k = means.size();
  p.dof_style = style;
  if (*lo == *hi) {
    p.grand_mean = *lo;
    p.dispersion = 0.0;
    return p;
  }
  const auto& k = kernels::active();
  p.grand_mean = std::clamp(k.sum(means) / static_cast<double>(p.k), *lo, *hi);
  p.dispersion = k.sum_sq_dev(means, p.grand_mean);
  return p;
}

PooledStats pooled_stats(std::span<const ArmSummary> arms, DofStyle style) {
  std::vector<double> means;
  means.reserve(arms.size());
  for (const auto& a : arms) means.push_back(a.mean);
  return pooled_stats(means, style);
}

double shrinkage_factor(double std_err_sq, const PooledStats& pooled) {
  if (!(std_err_sq >= 0.0)) throw InvalidInput("squared standard error must be >= 0");
  const double dof = pooled.dof();
  if (dof <= 0.0) return 0.0;
  if (pooled.dispersion == 0.0) return 1.0;
  const double xi = std_err_sq * dof / pooled.dispersion;
  return xi < 1.0 ? xi : 1.0;
}

namespace {

void check_xi(double xi) {
  if (!(xi >= 0.0 && xi <= 1.0)) throw InvalidInput("shrinkage factor must lie in [0, 1]");
}

}  // namespace

double variance_naive(double std_err_sq, double xi) {
  check_xi(xi);
  return (1.0 - xi) * std_err_sq;
}

double variance_full(double std_err_sq, double xi, double deviation, const PooledStats& pooled,
                     FullVarianceForm form) {
  check_xi(xi);
  const double dof = pooled.dof();
  if (dof <= 0.0) {
    throw NumericalDegeneracy("full variance undefined for K = " + std::to_string(pooled.k) +
                              " under the K-3 convention; use KMinus1");
  }
  const double k = static_cast<double>(pooled.k);
  const double keep = 1.0 - xi;
  const double dev_sq = deviation * deviation;
  const double naive = keep * std_err_sq;
  const double dispersion_term = 2.0 * xi * xi * dev_sq / dof;
  if (form == FullVarianceForm::Appendix) {
    return naive + xi * std_err_sq / k + dispersion_term;
  }
  return naive + xi * pooled.dispersion / k + dispersion_term;
}

double variance_mixture(double std_err_sq, double xi, double deviation, std::size_t k) {
  check_xi(xi);
  const double keep = 1.0 - xi;
  return keep * std_err_sq + xi * std_err_sq / static_cast<double>(k) +
         xi * keep * (deviation * deviation);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("normal quantile needs p in (0, 1)");
  if (p > 0.5) return -normal_quantile(1.0 - p);
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  // Halley step
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

double two_sided_z(double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("confidence level must lie in (0, 1)");
  return normal_quantile(0.5 + level / 2.0);
}

void ShrinkageColumns::resize(std::size_t n) {
  xi.resize(n);
  estimate.resize(n);
  var_naive.resize(n);
  var_full_appendix.resize(n);
  var_full_main.resize(n);
  var_mixture.resize(n);
}

PooledStats js_columns(std::span<const double> means, std::span<const double> std_err_sq,
                       DofStyle style, ShrinkageColumns& out) {
  if (means.size() != std_err_sq.size()) {
    throw InvalidInput("means and squared standard errors differ in length");
  }
  for (double v : std_err_sq) {
    if (!(v >= 0.0)) throw InvalidInput("squared standard error must be >= 0");
  }
  const PooledStats pooled = pooled_stats(means, style);
  out.resize(means.size());
  const kernels::ShrinkParams params{pooled.grand_mean, pooled.dispersion, pooled.dof(),
                                     static_cast<double>(pooled.k)};
  kernels::active().shrink(params, {means, std_err_sq, out.xi, out.estimate, out.var_naive,
                                    out.var_full_appendix, out.var_full_main, out.var_mixture});
  return pooled;
}

std::optional<double> ShrinkageResult::interval_variance(IntervalVariance which) const {
  switch (which) {
    case IntervalVariance::Full:
      return var_full;
    case IntervalVariance::Naive:
      return var_naive;
    case IntervalVariance::Mixture:
      return var_mixture;
  }
  return var_full;
}

ShrinkageReport js_estimate(std::span<const ArmSummary> arms, const ShrinkageOptions& options) {
  for (const auto& a : arms) validate(a);
  const double z = two_sided_z(options.level);

  const std::size_t n = arms.size();
  std::vector<double> means(n), se_sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    means[i] = arms[i].mean;
    se_sq[i] = arms[i].std_err * arms[i].std_err;
  }

  ShrinkageReport report;
  report.options = options;
  if (options.noise == NoiseModel::Pooled && n > 0) {
    const double common = kernels::active().sum(se_sq) / static_cast<double>(n);
    std::fill(se_sq.begin(), se_sq.end(), common);
    report.pooled_std_err_sq = common;
  }

  ShrinkageColumns cols;
  report.pooled = js_columns(means, se_sq, options.dof_style, cols);
  const auto& full = options.full_form == FullVarianceForm::Appendix ? cols.var_full_appendix
                                                                     : cols.var_full_main;
  report.arms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ShrinkageResult r;
    r.arm_id = arms[i].arm_id;
    r.raw_mean = arms[i].mean;
    r.std_err = arms[i].std_err;
    r.xi = cols.xi[i];
    r.estimate = cols.estimate[i];
    r.var_naive = cols.var_naive[i];
    if (report.full_variance_defined()) r.var_full = full[i];
    r.var_mixture = cols.var_mixture[i];
    if (const auto v = r.interval_variance(options.interval)) {
      const double half = z * std::sqrt(*v);
      r.ci_low = r.estimate - half;
      r.ci_high = r.estimate + half;
    }
    report.arms.push_back(std::move(r));
  }
  return report;
}

}  // namespace ebshrink
