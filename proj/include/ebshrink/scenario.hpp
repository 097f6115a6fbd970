#pragma once

// Synthetic ground-truth generators for simulation fixtures.

#include <cstdint>
#include <string>
#include <vector>

#include "ebshrink/estimator.hpp"

namespace ebshrink {

// "arm01", "arm02", ... padded to the width of `count`.
std::vector<std::string> arm_labels(std::uint32_t count);

struct NormalScenario {
  std::uint32_t arms = 16;
  double center = 0.0;
  // Standard deviation of the true means.
  double spread = 1.0;
  // Full-sample standard error of every arm.
  double std_err = 1.0;
  std::uint64_t n = 1000;
};

// True means ~ Normal(center, spread^2), drawn from stream `seed`.
std::vector<ArmSummary> generate_normal(const NormalScenario& s, std::uint64_t seed);

struct ConversionScenario {
  std::uint32_t arms = 20;
  double rate = 0.025;
  // alpha + beta of the Beta the true rates are drawn from.
  double concentration = 400.0;
  std::uint64_t n = 100000;
};

// True rates ~ Beta(rate * c, (1 - rate) * c); std_err = sqrt(p (1 - p) / n).
std::vector<ArmSummary> generate_conversion(const ConversionScenario& s, std::uint64_t seed);

}  // namespace ebshrink
