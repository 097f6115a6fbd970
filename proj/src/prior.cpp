#include "ebshrink/prior.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ebshrink/error.hpp"
#include "ebshrink/kernels.hpp"

namespace ebshrink {

void validate(const BetaParams& p) {
  if (!(p.alpha > 0.0 && std::isfinite(p.alpha) && p.beta > 0.0 && std::isfinite(p.beta))) {
    throw InvalidInput("Beta shapes must be finite and positive");
  }
}

BetaFit fit_beta_moments(double mean, double variance) {
  if (!(mean > 0.0 && mean < 1.0)) throw InvalidInput("Beta fit needs a mean in (0, 1)");
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    throw InvalidInput("Beta fit needs a finite, non-negative variance");
  }
  if (variance == 0.0) throw NumericalDegeneracy("Beta prior undefined: means have zero variance");
  BetaFit fit;
  fit.sample_mean = mean;
  fit.sample_variance = variance;
  const double common = mean * (1.0 - mean) / variance - 1.0;
  if (common <= 0.0) {
    fit.params = {1.0, 1.0};
    fit.uniform_fallback = true;
    return fit;
  }
  fit.params = {mean * common, (1.0 - mean) * common};
  return fit;
}

BetaFit fit_beta(std::span<const double> means) {
  if (means.size() < 2) {
    throw InvalidInput("Beta fit needs at least 2 means, got " + std::to_string(means.size()));
  }
  std::vector<double> x;
  x.reserve(means.size());
  for (double m : means) {
    if (!(m >= 0.0 && m <= 1.0)) throw InvalidInput("Beta fit needs means in [0, 1]");
    x.push_back(std::clamp(m, kMeanClamp, 1.0 - kMeanClamp));
  }
  std::sort(x.begin(), x.end());
  const double k = static_cast<double>(x.size());
  if (x.front() == x.back()) {
    throw NumericalDegeneracy("Beta prior undefined: means have zero variance");
  }
  const auto& kern = kernels::active();
  const double mean = kern.sum(x) / k;
  const double variance = kern.sum_sq_dev(x, mean) / (k - 1.0);
  return fit_beta_moments(mean, variance);
}

BetaParams posterior(const BetaParams& prior, std::uint64_t successes, std::uint64_t failures) {
  return {prior.alpha + static_cast<double>(successes), prior.beta + static_cast<double>(failures)};
}

}  // namespace ebshrink
