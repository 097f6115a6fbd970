#pragma once

// Batch Thompson sampling over Bernoulli arms, comparing an empirical-Bayes
// Beta prior with the uniform Beta(1, 1) prior.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ebshrink/prior.hpp"
#include "ebshrink/rng.hpp"

namespace ebshrink {

struct GroundTruth {
  std::vector<std::string> arm_ids;
  std::vector<double> true_means;

  // Throws InvalidInput on an empty truth, mismatched sizes, duplicate ids or
  // means outside [0, 1].
  void validate() const;
  std::size_t size() const { return true_means.size(); }
  double best_mean() const;
  // Lowest index attaining the maximum mean. Regret is unaffected by ties;
  // best-arm rates count only this arm.
  std::size_t best_arm() const;
  // Arm indices by decreasing mean, ties by increasing index.
  std::vector<std::size_t> ranking() const;
};

enum class PriorMode { EmpiricalBayes, Uniform };
enum class RefitScope { Cumulative, LastBatch };

const char* to_string(PriorMode m);
const char* to_string(RefitScope s);

struct BanditConfig {
  std::uint32_t batch_size = 1000;
  std::uint32_t n_batches = 40;
  std::uint32_t n_posterior_draws = 10000;
  PriorMode prior_mode = PriorMode::EmpiricalBayes;
  RefitScope refit_scope = RefitScope::Cumulative;
  std::uint64_t seed = 1;
  double early_fraction = 0.25;
  // Largest j for which the mass on the top-j arms is tracked.
  std::uint32_t top_j = 6;

  void validate() const;
  // ceil(early_fraction * n_batches), at least 1.
  std::uint32_t early_batches() const;
};

// Per-arm random streams for one replication. Arms are keyed by a hash of
// their identifier, so reordering arms reorders draws with them.
class ArmStreams {
 public:
  ArmStreams(std::uint64_t seed, std::uint64_t replication, std::span<const std::string> arm_ids);

  std::size_t size() const { return arm_keys_.size(); }
  StreamKey arm(std::size_t k) const { return arm_keys_[k]; }
  // Arm indices sorted by stream key; allocation walks arms in this order.
  std::span<const std::size_t> canonical_order() const { return order_; }
  StreamKey shared() const { return shared_; }

 private:
  std::vector<StreamKey> arm_keys_;
  std::vector<std::size_t> order_;
  StreamKey shared_;
};

// Monte Carlo probability that each arm has the largest posterior draw.
// Ties within a draw go to the tied arm with the largest tie-break uniform.
std::vector<double> best_arm_distribution(std::span<const BetaParams> posteriors,
                                          std::uint32_t n_draws, const ArmStreams& streams,
                                          std::uint32_t batch);

// Multinomial(batch_size, probs). Throws InvalidInput unless probs is a
// distribution within 1e-9.
std::vector<std::uint32_t> allocate_batch(std::span<const double> probs, std::uint32_t batch_size,
                                          const ArmStreams& streams, std::uint32_t batch);

struct BatchRecord {
  // Allocation used for this batch (computed from data before it).
  std::vector<double> allocation;
  std::vector<std::uint32_t> plays;
  std::vector<std::uint32_t> successes;
  // Expected regret accumulated through the end of this batch.
  double cumulative_regret = 0.0;
  double best_arm_probability = 0.0;
  // top_mass[j - 1] = allocation mass on the j best arms, j = 1..top_j.
  std::vector<double> top_mass;
  BetaParams prior;
  bool prior_fallback = false;
};

struct BanditTrajectory {
  std::vector<BatchRecord> batches;
};

BanditTrajectory simulate_bandit(const GroundTruth& truth, const BanditConfig& config,
                                 std::uint32_t replication = 0);

inline constexpr std::array<double, 3> kRegretPercentiles{2.5, 50.0, 97.5};

// Linear interpolation between order statistics (type 7).
double percentile(std::vector<double> values, double pct);

struct CheckpointSummary {
  std::uint32_t batches = 0;
  std::array<double, 3> regret_percentiles{};
  double mean_regret = 0.0;
  // Share of the checkpoint batch's units that went to the best arm.
  double best_arm_play_rate = 0.0;
  double best_arm_probability = 0.0;
  // Mean over batches 1..checkpoint of the top-j mass, j = 1..top_j.
  std::vector<double> mean_top_mass;
};

struct ModeSummary {
  PriorMode mode = PriorMode::EmpiricalBayes;
  std::uint32_t replications = 0;
  CheckpointSummary early;
  CheckpointSummary final;
  // [batch][j - 1], averaged over replications.
  std::vector<std::vector<double>> top_mass_trajectory;
  std::vector<double> best_arm_probability_trajectory;
  std::vector<double> final_regrets;
  std::vector<double> early_regrets;
  std::uint64_t prior_fallback_batches = 0;
};

struct RelativeChange {
  // (EB - Uniform) / Uniform per percentile; empty when Uniform is 0.
  std::array<std::optional<double>, 3> percentiles;
  bool division_by_zero = false;
};

struct ComparisonReport {
  std::uint32_t early_batches = 0;
  std::vector<ModeSummary> modes;
  // Present when both modes ran.
  std::optional<RelativeChange> early_change;
  std::optional<RelativeChange> final_change;
};

// Runs `modes` on the same replication streams (paired seeds). Replications
// run on up to `threads` workers; results do not depend on the count.
ComparisonReport compare_methods(const GroundTruth& truth, const BanditConfig& config,
                                 std::uint32_t n_replications, unsigned threads = 1,
                                 std::vector<PriorMode> modes = {PriorMode::EmpiricalBayes,
                                                                 PriorMode::Uniform});

}  // namespace ebshrink
