#pragma once

// Empirical-Bayes Beta priors for Bernoulli arms.

#include <cstdint>
#include <span>

namespace ebshrink {

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;

  double mean() const { return alpha / (alpha + beta); }
  double variance() const {
    const double t = alpha + beta;
    return alpha * beta / (t * t * (t + 1.0));
  }
};

// Throws InvalidInput unless both shapes are finite and positive.
void validate(const BetaParams& p);

struct BetaFit {
  BetaParams params;
  // Set when the moments are outside the Beta family (common <= 0) and the
  // uniform Beta(1, 1) was returned instead.
  bool uniform_fallback = false;
  double sample_mean = 0.0;
  double sample_variance = 0.0;
};

// Bounds applied to each mean before fitting.
inline constexpr double kMeanClamp = 1e-9;

// Method of moments: common = m (1 - m) / v - 1, alpha = m common,
// beta = (1 - m) common.
BetaFit fit_beta_moments(double mean, double variance);

// Fits to the sample mean and the (K - 1)-denominator sample variance of
// `means`, each clamped to [1e-9, 1 - 1e-9]. The result does not depend on
// the order of `means`. Throws NumericalDegeneracy on zero variance.
BetaFit fit_beta(std::span<const double> means);

// Conjugate update.
BetaParams posterior(const BetaParams& prior, std::uint64_t successes, std::uint64_t failures);

}  // namespace ebshrink
