#include "ebshrink/staticsim.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "ebshrink/error.hpp"
#include "ebshrink/kernels.hpp"
#include "ebshrink/parallel.hpp"

namespace ebshrink {

std::vector<TruthArm> truth_from_summaries(std::span<const ArmSummary> arms) {
  std::vector<TruthArm> out;
  out.reserve(arms.size());
  for (const auto& a : arms) out.push_back({a.arm_id, a.n, a.mean, a.std_err});
  return out;
}

void StaticConfig::validate() const {
  if (!(downsample_fraction > 0.0 && downsample_fraction <= 1.0)) {
    throw InvalidInput("downsample fraction must lie in (0, 1]");
  }
  if (n_replications == 0) throw InvalidInput("replication count must be positive");
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("confidence level must lie in (0, 1)");
}

std::uint64_t downsampled_size(std::uint64_t n, double fraction) {
  const double v = std::round(fraction * static_cast<double>(n));
  return v < 1.0 ? 1 : static_cast<std::uint64_t>(v);
}

namespace {

void check_truth(std::span<const TruthArm> truth) {
  for (const auto& a : truth) {
    if (a.n == 0) throw InvalidInput("arm '" + a.arm_id + "' has zero sample size");
    if (!std::isfinite(a.mean)) throw InvalidInput("arm '" + a.arm_id + "' has a non-finite mean");
    if (!(a.std_err >= 0.0) || !std::isfinite(a.std_err)) {
      throw InvalidInput("arm '" + a.arm_id + "' has an invalid standard error");
    }
  }
}

double sample_sd(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / (x.size() - 1.0));
}

double sample_cov(std::span<const double> a, std::span<const double> b, double ma, double mb) {
  if (a.size() < 2) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - ma) * (b[i] - mb);
  return acc / (a.size() - 1.0);
}

}  // namespace

std::vector<ArmSummary> bootstrap_replicate(std::span<const TruthArm> truth, double fraction,
                                            StreamKey key, std::uint32_t replication) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidInput("downsample fraction must lie in (0, 1]");
  check_truth(truth);
  std::vector<double> z(truth.size());
  kernels::active().normal_fill(key, 0, replication, static_cast<std::uint32_t>(StreamTag::Bootstrap), z);
  std::vector<ArmSummary> out(truth.size());
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const auto& t = truth[k];
    const std::uint64_t n2 = downsampled_size(t.n, fraction);
    const double se = t.std_err * std::sqrt(static_cast<double>(t.n) / static_cast<double>(n2));
    out[k].arm_id = t.arm_id;
    out[k].n = n2;
    out[k].std_err = se;
    out[k].mean = std::fma(se, z[k], t.mean);
  }
  return out;
}

MseEstimate mse_from_replications(std::span<const double> sq) {
  if (sq.empty()) throw InvalidInput("MSE needs at least one replication");
  std::vector<double> v(sq.begin(), sq.end());
  MseEstimate e;
  e.mse = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  e.std_err = sample_sd(v) / std::sqrt(static_cast<double>(v.size()));
  return e;
}

MseEstimate compound_mse(std::span<const double> truth, const std::vector<std::vector<double>>& estimates) {
  std::vector<double> sq;
  sq.reserve(estimates.size());
  for (const auto& row : estimates) {
    if (row.size() != truth.size()) throw InvalidInput("estimate row length does not match the truth");
    sq.push_back(kernels::active().sum_sq_diff(row, truth));
  }
  return mse_from_replications(sq);
}

double RatioEstimate::lower95() const { return ratio - two_sided_z(0.95) * std_err; }
double RatioEstimate::upper95() const { return ratio + two_sided_z(0.95) * std_err; }

RatioEstimate mse_ratio(std::span<const double> num, std::span<const double> den) {
  if (num.size() != den.size() || num.empty()) throw InvalidInput("ratio needs paired, non-empty samples");
  const double n = static_cast<double>(num.size());
  const double a = std::accumulate(num.begin(), num.end(), 0.0) / n;
  const double b = std::accumulate(den.begin(), den.end(), 0.0) / n;
  RatioEstimate r;
  if (b == 0.0) {
    r.ratio = std::numeric_limits<double>::quiet_NaN();
    r.std_err = std::numeric_limits<double>::quiet_NaN();
    r.defined = false;
    return r;
  }
  r.ratio = a / b;
  const double var_a = sample_cov(num, num, a, a) / n;
  const double var_b = sample_cov(den, den, b, b) / n;
  const double cov = sample_cov(num, den, a, b) / n;
  // (A/B)^2 (varA/A^2 + varB/B^2 - 2 cov/(AB)), multiplied through so A = 0 is fine.
  const double v = (var_a - 2.0 * r.ratio * cov + r.ratio * r.ratio * var_b) / (b * b);
  r.std_err = std::sqrt(std::max(v, 0.0));
  return r;
}

CoverageRate coverage_rate(std::uint64_t covered, std::uint64_t total) {
  if (total == 0) throw InvalidInput("coverage needs at least one replication");
  CoverageRate c;
  c.rate = static_cast<double>(covered) / static_cast<double>(total);
  c.std_err = std::sqrt(c.rate * (1.0 - c.rate) / static_cast<double>(total));
  return c;
}

std::vector<CoverageRate> coverage(std::span<const double> truth,
                                   const std::vector<std::vector<Interval>>& intervals) {
  std::vector<std::uint64_t> hits(truth.size(), 0);
  for (const auto& row : intervals) {
    if (row.size() != truth.size()) throw InvalidInput("interval row length does not match the truth");
    for (std::size_t k = 0; k < truth.size(); ++k) {
      if (!(row[k].low <= row[k].high)) throw InvalidInput("interval with low > high");
      hits[k] += row[k].low <= truth[k] && truth[k] <= row[k].high;
    }
  }
  std::vector<CoverageRate> out;
  for (auto h : hits) out.push_back(coverage_rate(h, intervals.size()));
  return out;
}

namespace {

struct ReplicationResult {
  std::vector<double> sq_js, sq_raw;
  std::vector<std::uint8_t> cover_js, cover_raw;
};

}  // namespace

StaticReport run_static(std::span<const TruthArm> truth, const StaticConfig& config, unsigned threads,
                        std::uint64_t stream) {
  config.validate();
  check_truth(truth);
  const std::size_t k = truth.size();
  if (k < 2) throw InvalidInput("static simulation needs at least 2 arms");
  const std::uint32_t reps = config.n_replications;
  const double z = two_sided_z(config.level);
  const StreamKey key = make_key(config.seed, stream);

  std::vector<double> mu(k);
  for (std::size_t i = 0; i < k; ++i) mu[i] = truth[i].mean;

  std::vector<ReplicationResult> results(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    const auto draw = bootstrap_replicate(truth, config.downsample_fraction, key, static_cast<std::uint32_t>(r));
    std::vector<double> means(k), se_sq(k);
    for (std::size_t i = 0; i < k; ++i) {
      means[i] = draw[i].mean;
      se_sq[i] = draw[i].std_err * draw[i].std_err;
    }
    ShrinkageColumns cols;
    js_columns(means, se_sq, config.dof_style, cols);
    auto& out = results[r];
    out.sq_js.resize(k);
    out.sq_raw.resize(k);
    out.cover_js.resize(k);
    out.cover_raw.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      const double e_js = cols.estimate[i] - mu[i];
      const double e_raw = means[i] - mu[i];
      out.sq_js[i] = e_js * e_js;
      out.sq_raw[i] = e_raw * e_raw;
      const double h_raw = z * draw[i].std_err;
      out.cover_raw[i] = means[i] - h_raw <= mu[i] && mu[i] <= means[i] + h_raw;
      const double h_js = z * std::sqrt(cols.var_full_appendix[i]);
      out.cover_js[i] = cols.estimate[i] - h_js <= mu[i] && mu[i] <= cols.estimate[i] + h_js;
    }
  });

  StaticReport rep;
  rep.replications = reps;
  std::vector<double> comp_js(reps), comp_raw(reps);
  std::vector<double> arm_js(k, 0.0), arm_raw(k, 0.0);
  std::vector<std::uint64_t> hit_js(k, 0), hit_raw(k, 0);
  for (std::uint32_t r = 0; r < reps; ++r) {
    const auto& res = results[r];
    double cj = 0.0, cr = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      cj += res.sq_js[i];
      cr += res.sq_raw[i];
      arm_js[i] += res.sq_js[i];
      arm_raw[i] += res.sq_raw[i];
      hit_js[i] += res.cover_js[i];
      hit_raw[i] += res.cover_raw[i];
    }
    comp_js[r] = cj;
    comp_raw[r] = cr;
  }
  rep.compound_js = mse_from_replications(comp_js);
  rep.compound_raw = mse_from_replications(comp_raw);
  rep.compound_ratio = mse_ratio(comp_js, comp_raw);

  // Shrinkage of the full-sample summaries themselves.
  std::vector<double> full_se_sq(k);
  for (std::size_t i = 0; i < k; ++i) full_se_sq[i] = truth[i].std_err * truth[i].std_err;
  ShrinkageColumns full;
  rep.pooled = js_columns(mu, full_se_sq, config.dof_style, full);
  rep.js_intervals_defined = rep.pooled.dof() > 0.0;

  const double grand = std::accumulate(mu.begin(), mu.end(), 0.0) / k;
  const double sd = sample_sd(mu);
  std::size_t improved = 0;
  for (std::size_t i = 0; i < k; ++i) {
    StaticArmReport a;
    a.arm_id = truth[i].arm_id;
    a.true_mean = mu[i];
    a.std_err = truth[i].std_err;
    a.standardized_effect = sd > 0.0 ? (mu[i] - grand) / sd : 0.0;
    a.raw_effect = mu[i] - rep.pooled.grand_mean;
    a.shrunk_effect = full.estimate[i] - rep.pooled.grand_mean;
    a.xi = full.xi[i];
    a.mse_js = arm_js[i] / reps;
    a.mse_raw = arm_raw[i] / reps;
    a.mse_ratio = a.mse_raw > 0.0 ? a.mse_js / a.mse_raw : std::numeric_limits<double>::quiet_NaN();
    a.coverage_raw = coverage_rate(hit_raw[i], reps);
    a.coverage_js = coverage_rate(hit_js[i], reps);
    improved += a.mse_js < a.mse_raw;
    rep.arms.push_back(std::move(a));
  }
  rep.fraction_improved = static_cast<double>(improved) / k;

  if (!config.subsample_arm_counts.empty()) rep.arms_curve = arms_curve(truth, config, threads, stream);
  return rep;
}

std::vector<ArmsCurvePoint> arms_curve(std::span<const TruthArm> truth, const StaticConfig& config,
                                       unsigned threads, std::uint64_t stream) {
  config.validate();
  check_truth(truth);
  const auto full = static_cast<std::uint32_t>(truth.size());
  std::vector<ArmsCurvePoint> curve;
  for (std::uint32_t target : config.subsample_arm_counts) {
    if (target < 3) throw InvalidInput("arms-curve size must be at least 3, got " + std::to_string(target));
    if (target > full) {
      throw InvalidInput("arms-curve size " + std::to_string(target) + " exceeds the " +
                         std::to_string(full) + " available arms");
    }
    const StreamKey key = make_key(config.seed, stream, 0x10000ULL + target);
    const std::uint32_t reps = config.n_replications;
    std::vector<double> sq_js(reps), sq_raw(reps);
    parallel_for(reps, threads, [&](std::size_t r) {
      const auto rr = static_cast<std::uint32_t>(r);
      std::vector<std::uint32_t> idx(full);
      std::iota(idx.begin(), idx.end(), 0U);
      CounterStream pick(key, rr, StreamTag::Subsample);
      for (std::uint32_t i = 0; i < target; ++i) {
        const std::uint32_t j = i + pick.below(full - i);
        std::swap(idx[i], idx[j]);
      }
      std::vector<TruthArm> sub(target);
      for (std::uint32_t i = 0; i < target; ++i) sub[i] = truth[idx[i]];
      const auto draw = bootstrap_replicate(sub, config.downsample_fraction, key, rr);
      std::vector<double> means(target), se_sq(target), mu(target);
      for (std::uint32_t i = 0; i < target; ++i) {
        means[i] = draw[i].mean;
        se_sq[i] = draw[i].std_err * draw[i].std_err;
        mu[i] = sub[i].mean;
      }
      ShrinkageColumns cols;
      js_columns(means, se_sq, config.dof_style, cols);
      const auto& kern = kernels::active();
      sq_js[r] = kern.sum_sq_diff(cols.estimate, mu);
      sq_raw[r] = kern.sum_sq_diff(means, mu);
    });
    ArmsCurvePoint p;
    p.arms = target;
    p.js = mse_from_replications(sq_js);
    p.raw = mse_from_replications(sq_raw);
    p.ratio = mse_ratio(sq_js, sq_raw);
    curve.push_back(p);
  }
  return curve;
}

}  // namespace ebshrink
