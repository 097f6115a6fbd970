#include "ebshrink/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ebshrink/error.hpp"
#include "ebshrink/kernels.hpp"
#include "ebshrink/parallel.hpp"

namespace ebshrink {

void GroundTruth::validate() const {
  if (true_means.empty()) throw InvalidInput("ground truth has no arms");
  if (arm_ids.size() != true_means.size()) {
    throw InvalidInput("ground truth has " + std::to_string(arm_ids.size()) + " ids for " +
                       std::to_string(true_means.size()) + " means");
  }
  std::set<std::string_view> seen;
  for (std::size_t k = 0; k < true_means.size(); ++k) {
    if (!seen.insert(arm_ids[k]).second) throw InvalidInput("duplicate arm id '" + arm_ids[k] + "'");
    if (!(true_means[k] >= 0.0 && true_means[k] <= 1.0)) {
      throw InvalidInput("true mean of arm '" + arm_ids[k] + "' is outside [0, 1]");
    }
  }
}

double GroundTruth::best_mean() const { return *std::max_element(true_means.begin(), true_means.end()); }

std::size_t GroundTruth::best_arm() const {
  return static_cast<std::size_t>(std::max_element(true_means.begin(), true_means.end()) -
                                  true_means.begin());
}

std::vector<std::size_t> GroundTruth::ranking() const {
  std::vector<std::size_t> idx(true_means.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return true_means[a] > true_means[b]; });
  return idx;
}

const char* to_string(PriorMode m) { return m == PriorMode::EmpiricalBayes ? "eb" : "uniform"; }
const char* to_string(RefitScope s) { return s == RefitScope::Cumulative ? "cumulative" : "last-batch"; }

void BanditConfig::validate() const {
  if (batch_size == 0) throw InvalidInput("batch size must be positive");
  if (n_batches == 0) throw InvalidInput("batch count must be positive");
  if (n_posterior_draws == 0) throw InvalidInput("posterior draw count must be positive");
  if (!(early_fraction > 0.0 && early_fraction < 1.0)) {
    throw InvalidInput("early fraction must lie in (0, 1)");
  }
  if (top_j == 0) throw InvalidInput("top-j must be positive");
}

std::uint32_t BanditConfig::early_batches() const {
  const double e = std::ceil(early_fraction * static_cast<double>(n_batches));
  return static_cast<std::uint32_t>(std::clamp(e, 1.0, static_cast<double>(n_batches)));
}

namespace {

constexpr std::uint64_t kSharedStream = 0x5348415245445F31ULL;

}  // namespace

ArmStreams::ArmStreams(std::uint64_t seed, std::uint64_t replication,
                       std::span<const std::string> arm_ids) {
  arm_keys_.reserve(arm_ids.size());
  for (const auto& id : arm_ids) arm_keys_.push_back(make_key(seed, replication, hash_label(id)));
  order_.resize(arm_ids.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    const auto& ka = arm_keys_[a];
    const auto& kb = arm_keys_[b];
    if (ka.hi != kb.hi) return ka.hi < kb.hi;
    if (ka.lo != kb.lo) return ka.lo < kb.lo;
    return arm_ids[a] < arm_ids[b];
  });
  shared_ = make_key(seed, replication, kSharedStream);
}

std::vector<double> best_arm_distribution(std::span<const BetaParams> posteriors,
                                          std::uint32_t n_draws, const ArmStreams& streams,
                                          std::uint32_t batch) {
  const std::size_t k = posteriors.size();
  if (k < 2) throw InvalidInput("best-arm distribution needs at least 2 arms");
  if (n_draws == 0) throw InvalidInput("best-arm distribution needs at least 1 draw");
  if (streams.size() != k) throw InvalidInput("stream count does not match arm count");
  for (const auto& p : posteriors) validate(p);

  const auto& kern = kernels::active();
  std::vector<double> draws(k * n_draws);
  const auto tag = static_cast<std::uint32_t>(StreamTag::PosteriorDraw);
  for (std::size_t a = 0; a < k; ++a) {
    kern.beta_fill(streams.arm(a), posteriors[a].alpha, posteriors[a].beta, batch, tag,
                   std::span<double>(draws).subspan(a * n_draws, n_draws));
  }
  std::vector<std::uint32_t> best(n_draws);
  std::vector<std::uint8_t> tied(n_draws);
  kern.argmax_rows(draws, k, best, tied);

  std::vector<std::uint64_t> wins(k, 0);
  const auto tie_tag = static_cast<std::uint32_t>(StreamTag::TieBreak);
  for (std::uint32_t d = 0; d < n_draws; ++d) {
    std::size_t winner = best[d];
    if (tied[d]) {
      const double top = draws[winner * n_draws + d];
      double best_u = -1.0;
      for (std::size_t a = 0; a < k; ++a) {
        if (draws[a * n_draws + d] != top) continue;
        const double u = uniform_at(streams.arm(a), {d, 0, batch, tie_tag});
        if (u > best_u) {
          best_u = u;
          winner = a;
        }
      }
    }
    ++wins[winner];
  }
  std::vector<double> probs(k);
  for (std::size_t a = 0; a < k; ++a) {
    probs[a] = static_cast<double>(wins[a]) / static_cast<double>(n_draws);
  }
  return probs;
}

std::vector<std::uint32_t> allocate_batch(std::span<const double> probs, std::uint32_t batch_size,
                                          const ArmStreams& streams, std::uint32_t batch) {
  const std::size_t k = probs.size();
  if (k == 0 || streams.size() != k) throw InvalidInput("allocation needs one stream per arm");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidInput("allocation probabilities must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("allocation probabilities must sum to 1");

  // Cumulative mass in canonical arm order, so the draw does not depend on
  // how the caller ordered the arms.
  const auto order = streams.canonical_order();
  std::vector<double> cdf(k);
  double run = 0.0;
  std::size_t last_positive = order[0];
  for (std::size_t i = 0; i < k; ++i) {
    run += probs[order[i]];
    cdf[i] = run;
    if (probs[order[i]] > 0.0) last_positive = i;
  }
  std::vector<std::uint32_t> counts(k, 0);
  CounterStream stream(streams.shared(), batch, StreamTag::Allocation);
  for (std::uint32_t u = 0; u < batch_size; ++u) {
    const double x = stream.uniform() * run;
    std::size_t i = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), x) - cdf.begin());
    if (i > last_positive) i = last_positive;
    ++counts[order[i]];
  }
  return counts;
}

namespace {

struct Fitted {
  BetaParams prior;
  bool fallback = false;
};

Fitted eb_prior(std::span<const std::uint64_t> plays, std::span<const std::uint64_t> wins) {
  std::vector<double> means;
  for (std::size_t a = 0; a < plays.size(); ++a) {
    if (plays[a] > 0) means.push_back(static_cast<double>(wins[a]) / static_cast<double>(plays[a]));
  }
  if (means.size() < 2) return {{1.0, 1.0}, true};
  try {
    const BetaFit fit = fit_beta(means);
    return {fit.params, fit.uniform_fallback};
  } catch (const NumericalDegeneracy&) {
    return {{1.0, 1.0}, true};
  }
}

}  // namespace

BanditTrajectory simulate_bandit(const GroundTruth& truth, const BanditConfig& config,
                                 std::uint32_t replication) {
  truth.validate();
  config.validate();
  const std::size_t k = truth.size();
  if (k < 2) throw InvalidInput("bandit simulation needs at least 2 arms");

  const ArmStreams streams(config.seed, replication, truth.arm_ids);
  const auto ranking = truth.ranking();
  const std::size_t best = truth.best_arm();
  const double best_mean = truth.best_mean();
  const std::size_t top_j = std::min<std::size_t>(config.top_j, k);

  std::vector<std::uint64_t> plays(k, 0), wins(k, 0);
  std::vector<std::uint64_t> last_plays(k, 0), last_wins(k, 0);
  std::vector<BetaParams> posts(k);
  double regret = 0.0;

  BanditTrajectory out;
  out.batches.reserve(config.n_batches);
  for (std::uint32_t b = 0; b < config.n_batches; ++b) {
    BatchRecord rec;
    Fitted prior{{1.0, 1.0}, false};
    if (config.prior_mode == PriorMode::EmpiricalBayes) {
      if (b == 0) {
        prior.fallback = true;
      } else if (config.refit_scope == RefitScope::Cumulative) {
        prior = eb_prior(plays, wins);
      } else {
        prior = eb_prior(last_plays, last_wins);
      }
    }
    for (std::size_t a = 0; a < k; ++a) posts[a] = posterior(prior.prior, wins[a], plays[a] - wins[a]);

    rec.allocation = best_arm_distribution(posts, config.n_posterior_draws, streams, b);
    rec.plays = allocate_batch(rec.allocation, config.batch_size, streams, b);
    rec.successes.assign(k, 0);
    for (std::size_t a = 0; a < k; ++a) {
      CounterStream outcomes(streams.arm(a), b, StreamTag::Outcome);
      std::uint32_t s = 0;
      for (std::uint32_t u = 0; u < rec.plays[a]; ++u) s += outcomes.uniform() < truth.true_means[a];
      rec.successes[a] = s;
      plays[a] += rec.plays[a];
      wins[a] += s;
      last_plays[a] = rec.plays[a];
      last_wins[a] = s;
    }
    double batch_regret = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      batch_regret += static_cast<double>(rec.plays[a]) * (best_mean - truth.true_means[a]);
    }
    regret += batch_regret;
    rec.cumulative_regret = regret;
    rec.best_arm_probability = rec.allocation[best];
    rec.top_mass.resize(top_j);
    double mass = 0.0;
    for (std::size_t j = 0; j < top_j; ++j) {
      mass += rec.allocation[ranking[j]];
      rec.top_mass[j] = mass;
    }
    rec.prior = prior.prior;
    rec.prior_fallback = prior.fallback;
    out.batches.push_back(std::move(rec));
  }
  return out;
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw InvalidInput("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * pct / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

// What compare_methods keeps from one trajectory.
struct RunDigest {
  std::vector<double> regret;
  std::vector<double> best_probability;
  std::vector<std::vector<double>> top_mass;
  double early_best_share = 0.0;
  double final_best_share = 0.0;
  std::uint64_t fallbacks = 0;
};

RunDigest digest(const BanditTrajectory& t, std::size_t best, std::uint32_t early,
                 std::uint32_t batch_size) {
  RunDigest d;
  for (const auto& rec : t.batches) {
    d.regret.push_back(rec.cumulative_regret);
    d.best_probability.push_back(rec.best_arm_probability);
    d.top_mass.push_back(rec.top_mass);
    d.fallbacks += rec.prior_fallback;
  }
  const double n = static_cast<double>(batch_size);
  d.early_best_share = t.batches[early - 1].plays[best] / n;
  d.final_best_share = t.batches.back().plays[best] / n;
  return d;
}

CheckpointSummary summarize(const std::vector<RunDigest>& runs, std::uint32_t upto) {
  CheckpointSummary s;
  s.batches = upto;
  const double r = static_cast<double>(runs.size());
  std::vector<double> regrets;
  const bool final = upto == runs.front().regret.size();
  const std::size_t j_count = runs.front().top_mass.front().size();
  s.mean_top_mass.assign(j_count, 0.0);
  for (const auto& run : runs) {
    regrets.push_back(run.regret[upto - 1]);
    s.best_arm_play_rate += final ? run.final_best_share : run.early_best_share;
    s.best_arm_probability += run.best_probability[upto - 1];
    for (std::size_t j = 0; j < j_count; ++j) {
      double acc = 0.0;
      for (std::uint32_t b = 0; b < upto; ++b) acc += run.top_mass[b][j];
      s.mean_top_mass[j] += acc / upto;
    }
  }
  for (std::size_t i = 0; i < 3; ++i) s.regret_percentiles[i] = percentile(regrets, kRegretPercentiles[i]);
  s.mean_regret = std::accumulate(regrets.begin(), regrets.end(), 0.0) / r;
  s.best_arm_play_rate /= r;
  s.best_arm_probability /= r;
  for (auto& m : s.mean_top_mass) m /= r;
  return s;
}

RelativeChange relative_change(const CheckpointSummary& eb, const CheckpointSummary& uniform) {
  RelativeChange c;
  for (std::size_t i = 0; i < 3; ++i) {
    const double base = uniform.regret_percentiles[i];
    if (base == 0.0) {
      c.division_by_zero = true;
    } else {
      c.percentiles[i] = (eb.regret_percentiles[i] - base) / base;
    }
  }
  return c;
}

}  // namespace

ComparisonReport compare_methods(const GroundTruth& truth, const BanditConfig& config,
                                 std::uint32_t n_replications, unsigned threads,
                                 std::vector<PriorMode> modes) {
  truth.validate();
  config.validate();
  if (n_replications < 2) throw InvalidInput("comparison needs at least 2 replications");
  if (modes.empty()) throw InvalidInput("comparison needs at least one prior mode");

  const std::uint32_t early = config.early_batches();
  const std::size_t best = truth.best_arm();
  const std::size_t m_count = modes.size();
  std::vector<RunDigest> runs(n_replications * m_count);
  parallel_for(runs.size(), threads, [&](std::size_t task) {
    const auto rep = static_cast<std::uint32_t>(task / m_count);
    BanditConfig c = config;
    c.prior_mode = modes[task % m_count];
    runs[task] = digest(simulate_bandit(truth, c, rep), best, early, config.batch_size);
  });

  ComparisonReport report;
  report.early_batches = early;
  for (std::size_t m = 0; m < m_count; ++m) {
    std::vector<RunDigest> mine;
    mine.reserve(n_replications);
    for (std::uint32_t r = 0; r < n_replications; ++r) mine.push_back(std::move(runs[r * m_count + m]));
    ModeSummary s;
    s.mode = modes[m];
    s.replications = n_replications;
    s.early = summarize(mine, early);
    s.final = summarize(mine, config.n_batches);
    const std::size_t j_count = mine.front().top_mass.front().size();
    s.top_mass_trajectory.assign(config.n_batches, std::vector<double>(j_count, 0.0));
    s.best_arm_probability_trajectory.assign(config.n_batches, 0.0);
    for (const auto& run : mine) {
      for (std::uint32_t b = 0; b < config.n_batches; ++b) {
        for (std::size_t j = 0; j < j_count; ++j) s.top_mass_trajectory[b][j] += run.top_mass[b][j];
        s.best_arm_probability_trajectory[b] += run.best_probability[b];
      }
      s.final_regrets.push_back(run.regret.back());
      s.early_regrets.push_back(run.regret[early - 1]);
      s.prior_fallback_batches += run.fallbacks;
    }
    for (auto& row : s.top_mass_trajectory) {
      for (auto& v : row) v /= n_replications;
    }
    for (auto& v : s.best_arm_probability_trajectory) v /= n_replications;
    report.modes.push_back(std::move(s));
  }

  const ModeSummary* eb = nullptr;
  const ModeSummary* uni = nullptr;
  for (const auto& s : report.modes) {
    if (s.mode == PriorMode::EmpiricalBayes && !eb) eb = &s;
    if (s.mode == PriorMode::Uniform && !uni) uni = &s;
  }
  if (eb && uni) {
    report.early_change = relative_change(eb->early, uni->early);
    report.final_change = relative_change(eb->final, uni->final);
  }
  return report;
}

}  // namespace ebshrink
