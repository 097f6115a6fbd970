#include "ebshrink/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ebshrink/error.hpp"
#include "ebshrink/rng.hpp"

namespace ebshrink {

std::vector<std::string> arm_labels(std::uint32_t count) {
  const std::size_t width = std::max<std::size_t>(2, std::to_string(count).size());
  std::vector<std::string> out;
  out.reserve(count);
  for (std::uint32_t i = 1; i <= count; ++i) {
    std::string num = std::to_string(i);
    out.push_back("arm" + std::string(width - num.size(), '0') + num);
  }
  return out;
}

namespace {

constexpr auto kTag = static_cast<std::uint32_t>(StreamTag::Scenario);

}  // namespace

std::vector<ArmSummary> generate_normal(const NormalScenario& s, std::uint64_t seed) {
  if (s.arms < 1) throw InvalidInput("scenario needs at least one arm");
  if (!(s.spread >= 0.0) || !(s.std_err >= 0.0) || s.n == 0) {
    throw InvalidInput("scenario needs non-negative spread and std_err and a positive n");
  }
  const StreamKey key = make_key(seed, 0x4E4F524DULL);
  const auto ids = arm_labels(s.arms);
  std::vector<ArmSummary> out;
  for (std::uint32_t k = 0; k < s.arms; ++k) {
    ArmSummary a;
    a.arm_id = ids[k];
    a.n = s.n;
    a.mean = s.center + s.spread * normal_at(key, {k, 0, 0, kTag});
    a.std_err = s.std_err;
    out.push_back(a);
  }
  return out;
}

std::vector<ArmSummary> generate_conversion(const ConversionScenario& s, std::uint64_t seed) {
  if (s.arms < 1) throw InvalidInput("scenario needs at least one arm");
  if (!(s.rate > 0.0 && s.rate < 1.0)) throw InvalidInput("conversion rate must lie in (0, 1)");
  if (!(s.concentration > 0.0) || s.n == 0) {
    throw InvalidInput("scenario needs a positive concentration and n");
  }
  const StreamKey key = make_key(seed, 0x434F4E56ULL);
  const auto ids = arm_labels(s.arms);
  std::vector<ArmSummary> out;
  for (std::uint32_t k = 0; k < s.arms; ++k) {
    const double p = beta_at(key, s.rate * s.concentration, (1.0 - s.rate) * s.concentration, k, 0, kTag);
    ArmSummary a;
    a.arm_id = ids[k];
    a.n = s.n;
    a.mean = p;
    a.std_err = std::sqrt(p * (1.0 - p) / static_cast<double>(s.n));
    out.push_back(a);
  }
  return out;
}

}  // namespace ebshrink
