#include "ebshrink/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ebshrink/bandit.hpp"
#include "ebshrink/error.hpp"
#include "ebshrink/estimator.hpp"
#include "ebshrink/io.hpp"
#include "ebshrink/parallel.hpp"
#include "ebshrink/scenario.hpp"
#include "ebshrink/staticsim.hpp"
#include "report.hpp"

namespace ebshrink {
namespace {

namespace fs = std::filesystem;
using cli::CsvTable;
using cli::Json;
using cli::number;
using cli::Output;

constexpr const char* kTool = "ebshrink";

// ---- configs --------------------------------------------------------------
//
// Each subcommand's flags live in a struct that round-trips through the
// manifest's "config" object. Thread counts and output locations are not
// part of it: they never change the bytes produced.

struct EstimateArgs {
  std::string input;
  double level = 0.95;
  std::string dof = "k-3";
  std::string variance = "appendix";
  std::string noise = "per-arm";
  std::string format = "json";
};

struct StaticArgs {
  std::string input;
  std::uint32_t replications = 1000;
  double fraction = 0.2;
  double level = 0.95;
  std::uint64_t seed = 1;
  std::vector<std::uint32_t> arms_curve;
  std::string dof = "k-3";
};

struct BanditArgs {
  std::string input;
  std::uint32_t batches = 40;
  std::uint32_t batch_size = 1000;
  std::uint32_t draws = 10000;
  std::uint32_t replications = 100;
  std::string prior = "both";
  std::string refit = "cumulative";
  double early_fraction = 0.25;
  std::uint32_t top_j = 6;
  std::uint64_t seed = 1;
};

Json to_json(const EstimateArgs& a) {
  return Json{{"input", a.input}, {"level", a.level},       {"dof", a.dof},
              {"variance", a.variance}, {"noise", a.noise}, {"format", a.format}};
}

Json to_json(const StaticArgs& a) {
  return Json{{"input", a.input},   {"replications", a.replications}, {"fraction", a.fraction},
              {"level", a.level},   {"seed", a.seed},                 {"arms_curve", a.arms_curve},
              {"dof", a.dof}};
}

Json to_json(const BanditArgs& a) {
  return Json{{"input", a.input},
              {"batches", a.batches},
              {"batch_size", a.batch_size},
              {"draws", a.draws},
              {"replications", a.replications},
              {"prior", a.prior},
              {"refit", a.refit},
              {"early_fraction", a.early_fraction},
              {"top_j", a.top_j},
              {"seed", a.seed}};
}

template <class T>
void read_field(const Json& j, const char* key, T& dst) {
  if (!j.contains(key)) throw InvalidInput(std::string("manifest config lacks '") + key + "'");
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidInput(std::string("manifest config field '") + key + "' has the wrong type");
  }
}

EstimateArgs estimate_from_json(const Json& j) {
  EstimateArgs a;
  read_field(j, "input", a.input);
  read_field(j, "level", a.level);
  read_field(j, "dof", a.dof);
  read_field(j, "variance", a.variance);
  read_field(j, "noise", a.noise);
  read_field(j, "format", a.format);
  return a;
}

StaticArgs static_from_json(const Json& j) {
  StaticArgs a;
  read_field(j, "input", a.input);
  read_field(j, "replications", a.replications);
  read_field(j, "fraction", a.fraction);
  read_field(j, "level", a.level);
  read_field(j, "seed", a.seed);
  read_field(j, "arms_curve", a.arms_curve);
  read_field(j, "dof", a.dof);
  return a;
}

BanditArgs bandit_from_json(const Json& j) {
  BanditArgs a;
  read_field(j, "input", a.input);
  read_field(j, "batches", a.batches);
  read_field(j, "batch_size", a.batch_size);
  read_field(j, "draws", a.draws);
  read_field(j, "replications", a.replications);
  read_field(j, "prior", a.prior);
  read_field(j, "refit", a.refit);
  read_field(j, "early_fraction", a.early_fraction);
  read_field(j, "top_j", a.top_j);
  read_field(j, "seed", a.seed);
  return a;
}

DofStyle parse_dof(const std::string& s) {
  if (s == "k-3") return DofStyle::KMinus3;
  if (s == "k-1") return DofStyle::KMinus1;
  throw InvalidInput("unknown dof convention '" + s + "'");
}

Json manifest(const std::string& command, const Json& config, const Json& seed,
              const std::vector<std::string>& inputs) {
  Json files = Json::array();
  for (const auto& p : inputs) files.push_back(Json{{"path", p}, {"sha256", cli::sha256_file(p)}});
  return Json{{"tool", kTool},   {"version", EBSHRINK_VERSION}, {"command", command},
              {"config", config}, {"seed", seed},               {"inputs", files}};
}

Json pooled_json(const PooledStats& p) {
  return Json{{"arms", p.k},
              {"grand_mean", number(p.grand_mean)},
              {"dispersion", number(p.dispersion)},
              {"dof", number(p.dof())},
              {"dof_convention", to_string(p.dof_style)}};
}

// ---- estimate ---------------------------------------------------------------

std::vector<Output> run_estimate(const EstimateArgs& a, std::ostream& err) {
  ShrinkageOptions opt;
  opt.level = a.level;
  opt.dof_style = parse_dof(a.dof);
  if (a.variance == "appendix") {
    opt.interval = IntervalVariance::Full;
    opt.full_form = FullVarianceForm::Appendix;
  } else if (a.variance == "main-text") {
    opt.interval = IntervalVariance::Full;
    opt.full_form = FullVarianceForm::MainText;
  } else if (a.variance == "naive") {
    opt.interval = IntervalVariance::Naive;
  } else if (a.variance == "mixture") {
    opt.interval = IntervalVariance::Mixture;
  } else {
    throw InvalidInput("unknown variance form '" + a.variance + "'");
  }
  if (a.noise == "per-arm") {
    opt.noise = NoiseModel::PerArm;
  } else if (a.noise == "pooled") {
    opt.noise = NoiseModel::Pooled;
  } else {
    throw InvalidInput("unknown noise model '" + a.noise + "'");
  }
  if (a.format != "json" && a.format != "csv") throw InvalidInput("unknown format '" + a.format + "'");
  if (!(a.level > 0.0 && a.level < 1.0)) throw InvalidInput("confidence level must lie in (0, 1)");

  const auto experiments = read_experiments_file(a.input);
  const Json man = manifest("estimate", to_json(a), nullptr, {a.input});
  const double z = two_sided_z(a.level);

  Json exps = Json::array();
  CsvTable table({"experiment_id", "arm_id", "n", "raw_mean", "std_err", "xi", "estimate", "variance",
                  "ci_low", "ci_high"});
  for (const auto& e : experiments) {
    if (e.arms.size() < 2) {
      throw InvalidInput("experiment '" + e.id + "' has " + std::to_string(e.arms.size()) +
                         " arm; shrinkage needs at least 2");
    }
    const ShrinkageReport rep = js_estimate(e.arms, opt);
    if (opt.interval == IntervalVariance::Full && !rep.full_variance_defined()) {
      throw NumericalDegeneracy("experiment '" + e.id + "': full variance is undefined with " +
                                std::to_string(rep.pooled.k) +
                                " arms under the k-3 convention; use --dof k-1 or --variance naive|mixture");
    }
    Json warnings = Json::array();
    if (opt.interval == IntervalVariance::Naive) {
      const auto pooled = std::count_if(rep.arms.begin(), rep.arms.end(),
                                        [](const ShrinkageResult& r) { return r.xi == 1.0; });
      if (pooled > 0) {
        const std::string w = "experiment '" + e.id + "': " + std::to_string(pooled) +
                              " arm(s) have xi = 1, so the naive variance is 0 and understates uncertainty";
        warnings.push_back(w);
        err << "warning: " << w << '\n';
      }
    }
    Json arms = Json::array();
    for (std::size_t i = 0; i < rep.arms.size(); ++i) {
      const auto& r = rep.arms[i];
      const auto v = r.interval_variance(opt.interval);
      arms.push_back(Json{{"arm_id", r.arm_id},
                          {"n", e.arms[i].n},
                          {"raw_mean", number(r.raw_mean)},
                          {"std_err", number(r.std_err)},
                          {"xi", number(r.xi)},
                          {"estimate", number(r.estimate)},
                          {"variance", number(v)},
                          {"ci_low", number(r.ci_low)},
                          {"ci_high", number(r.ci_high)}});
      table.row().add(e.id).add(r.arm_id).add_count(e.arms[i].n).add(r.raw_mean).add(r.std_err).add(r.xi)
          .add(r.estimate).add(v).add(r.ci_low).add(r.ci_high);
    }
    Json ej{{"experiment_id", e.id},
            {"schema", to_string(e.schema)},
            {"pooled", pooled_json(rep.pooled)},
            {"variance", a.variance},
            {"noise", a.noise},
            {"level", number(a.level)},
            {"z", number(z)},
            {"pooled_std_err_sq", number(rep.pooled_std_err_sq)},
            {"warnings", warnings},
            {"arms", arms}};
    exps.push_back(std::move(ej));
  }
  if (a.format == "csv") return {{"-", table.render(man)}};
  return {{"-", cli::render_json(Json{{"manifest", man}, {"experiments", exps}})}};
}

// ---- static-sim -------------------------------------------------------------

Json mse_json(const MseEstimate& m) { return Json{{"mse", number(m.mse)}, {"std_err", number(m.std_err)}}; }

Json ratio_json(const RatioEstimate& r) {
  return Json{{"defined", r.defined},
              {"ratio", number(r.ratio)},
              {"std_err", number(r.std_err)},
              {"low95", number(r.defined ? r.lower95() : NAN)},
              {"high95", number(r.defined ? r.upper95() : NAN)}};
}

std::vector<Output> run_static_cmd(const StaticArgs& a, unsigned threads) {
  StaticConfig cfg;
  cfg.n_replications = a.replications;
  cfg.downsample_fraction = a.fraction;
  cfg.level = a.level;
  cfg.seed = a.seed;
  cfg.subsample_arm_counts = a.arms_curve;
  cfg.dof_style = parse_dof(a.dof);
  cfg.validate();

  const auto experiments = read_experiments_file(a.input);
  const Json man = manifest("static-sim", to_json(a), a.seed, {a.input});

  CsvTable fig3({"experiment_id", "arm_id", "raw_effect", "shrunk_effect", "xi"});
  CsvTable fig4({"experiment_id", "arms", "mse_js", "mse_js_se", "mse_raw", "mse_raw_se", "ratio", "ratio_se",
                 "ratio_low95", "ratio_high95", "fraction_improved"});
  CsvTable fig5({"experiment_id", "arm_id", "standardized_effect", "mse_js", "mse_raw", "mse_ratio"});
  CsvTable fig6({"experiment_id", "arms", "mse_js", "mse_raw", "ratio", "ratio_se"});
  CsvTable fig7({"experiment_id", "arm_id", "standardized_effect", "coverage_raw", "coverage_raw_se",
                 "coverage_js", "coverage_js_se"});

  Json exps = Json::array();
  for (const auto& e : experiments) {
    const auto truth = truth_from_summaries(e.arms);
    const StaticReport rep = run_static(truth, cfg, threads, hash_label(e.id));
    Json arms = Json::array();
    for (const auto& arm : rep.arms) {
      arms.push_back(Json{{"arm_id", arm.arm_id},
                          {"true_mean", number(arm.true_mean)},
                          {"std_err", number(arm.std_err)},
                          {"standardized_effect", number(arm.standardized_effect)},
                          {"raw_effect", number(arm.raw_effect)},
                          {"shrunk_effect", number(arm.shrunk_effect)},
                          {"xi", number(arm.xi)},
                          {"mse_js", number(arm.mse_js)},
                          {"mse_raw", number(arm.mse_raw)},
                          {"mse_ratio", number(arm.mse_ratio)},
                          {"coverage_raw", number(arm.coverage_raw.rate)},
                          {"coverage_raw_se", number(arm.coverage_raw.std_err)},
                          {"coverage_js", number(rep.js_intervals_defined ? arm.coverage_js.rate : NAN)},
                          {"coverage_js_se", number(rep.js_intervals_defined ? arm.coverage_js.std_err : NAN)}});
      fig3.row().add(e.id).add(arm.arm_id).add(arm.raw_effect).add(arm.shrunk_effect).add(arm.xi);
      fig5.row().add(e.id).add(arm.arm_id).add(arm.standardized_effect).add(arm.mse_js).add(arm.mse_raw)
          .add(arm.mse_ratio);
      fig7.row().add(e.id).add(arm.arm_id).add(arm.standardized_effect).add(arm.coverage_raw.rate)
          .add(arm.coverage_raw.std_err);
      if (rep.js_intervals_defined) {
        fig7.add(arm.coverage_js.rate).add(arm.coverage_js.std_err);
      } else {
        fig7.add(std::optional<double>{}).add(std::optional<double>{});
      }
    }
    const auto& r = rep.compound_ratio;
    fig4.row().add(e.id).add_count(rep.pooled.k).add(rep.compound_js.mse).add(rep.compound_js.std_err)
        .add(rep.compound_raw.mse).add(rep.compound_raw.std_err).add(r.ratio).add(r.std_err)
        .add(r.defined ? r.lower95() : NAN).add(r.defined ? r.upper95() : NAN).add(rep.fraction_improved);
    Json curve = Json::array();
    for (const auto& p : rep.arms_curve) {
      curve.push_back(Json{{"arms", p.arms}, {"js", mse_json(p.js)}, {"raw", mse_json(p.raw)},
                           {"ratio", ratio_json(p.ratio)}});
      fig6.row().add(e.id).add_count(p.arms).add(p.js.mse).add(p.raw.mse).add(p.ratio.ratio).add(p.ratio.std_err);
    }
    exps.push_back(Json{{"experiment_id", e.id},
                        {"pooled", pooled_json(rep.pooled)},
                        {"replications", rep.replications},
                        {"compound", Json{{"js", mse_json(rep.compound_js)},
                                          {"raw", mse_json(rep.compound_raw)},
                                          {"ratio", ratio_json(rep.compound_ratio)}}},
                        {"fraction_improved", number(rep.fraction_improved)},
                        {"js_intervals_defined", rep.js_intervals_defined},
                        {"arms", arms},
                        {"arms_curve", curve}});
  }
  return {{"report.json", cli::render_json(Json{{"manifest", man}, {"experiments", exps}})},
          {"fig3.csv", fig3.render(man)},
          {"fig4.csv", fig4.render(man)},
          {"fig5.csv", fig5.render(man)},
          {"fig6.csv", fig6.render(man)},
          {"fig7.csv", fig7.render(man)}};
}

// ---- bandit-sim -------------------------------------------------------------

GroundTruth truth_from(const Experiment& e) {
  GroundTruth g;
  for (const auto& a : e.arms) {
    g.arm_ids.push_back(a.arm_id);
    g.true_means.push_back(a.mean);
  }
  g.validate();
  return g;
}

const char* pct_key(std::size_t i) {
  static constexpr const char* kKeys[] = {"p2_5", "p50", "p97_5"};
  return kKeys[i];
}

Json checkpoint_json(const CheckpointSummary& c) {
  Json pct;
  for (std::size_t i = 0; i < 3; ++i) pct[pct_key(i)] = number(c.regret_percentiles[i]);
  Json top = Json::array();
  for (double m : c.mean_top_mass) top.push_back(number(m));
  return Json{{"batches", c.batches},
              {"regret_percentiles", pct},
              {"mean_regret", number(c.mean_regret)},
              {"best_arm_play_rate", number(c.best_arm_play_rate)},
              {"best_arm_probability", number(c.best_arm_probability)},
              {"mean_top_mass", top}};
}

Json change_json(const RelativeChange& c) {
  Json pct;
  for (std::size_t i = 0; i < 3; ++i) pct[pct_key(i)] = number(c.percentiles[i]);
  return Json{{"relative_change", pct}, {"division_by_zero", c.division_by_zero}};
}

std::vector<Output> run_bandit_cmd(const BanditArgs& a, unsigned threads, std::ostream& err) {
  BanditConfig cfg;
  cfg.batch_size = a.batch_size;
  cfg.n_batches = a.batches;
  cfg.n_posterior_draws = a.draws;
  cfg.early_fraction = a.early_fraction;
  cfg.top_j = a.top_j;
  if (a.refit == "cumulative") {
    cfg.refit_scope = RefitScope::Cumulative;
  } else if (a.refit == "last-batch") {
    cfg.refit_scope = RefitScope::LastBatch;
  } else {
    throw InvalidInput("unknown refit scope '" + a.refit + "'");
  }
  std::vector<PriorMode> modes;
  if (a.prior == "both") {
    modes = {PriorMode::EmpiricalBayes, PriorMode::Uniform};
  } else if (a.prior == "eb") {
    modes = {PriorMode::EmpiricalBayes};
  } else if (a.prior == "uniform") {
    modes = {PriorMode::Uniform};
  } else {
    throw InvalidInput("unknown prior mode '" + a.prior + "'");
  }
  cfg.validate();
  if (a.replications < 2) throw InvalidInput("bandit-sim needs at least 2 replications");
  if (a.draws < 10000) err << "warning: fewer than 10000 posterior draws per batch\n";

  const auto experiments = read_experiments_file(a.input);
  const Json man = manifest("bandit-sim", to_json(a), a.seed, {a.input});

  CsvTable fig8({"experiment_id", "checkpoint", "batches", "series", "p2_5", "p50", "p97_5"});
  CsvTable fig9({"experiment_id", "checkpoint", "batches", "mode", "best_arm_play_rate", "best_arm_probability"});
  std::vector<std::string> h10{"experiment_id", "mode", "batch", "best_arm_probability"};
  for (std::uint32_t j = 1; j <= a.top_j; ++j) h10.push_back("top" + std::to_string(j));
  CsvTable fig10(h10);

  Json exps = Json::array();
  for (const auto& e : experiments) {
    const GroundTruth truth = truth_from(e);
    if (truth.size() < 2) throw InvalidInput("experiment '" + e.id + "' needs at least 2 arms");
    cfg.seed = mix64(a.seed ^ hash_label(e.id));
    const ComparisonReport rep = compare_methods(truth, cfg, a.replications, threads, modes);
    Json mj = Json::array();
    for (const auto& m : rep.modes) {
      mj.push_back(Json{{"mode", to_string(m.mode)},
                        {"replications", m.replications},
                        {"prior_fallback_batches", m.prior_fallback_batches},
                        {"early", checkpoint_json(m.early)},
                        {"final", checkpoint_json(m.final)}});
      for (const auto* c : {&m.early, &m.final}) {
        const char* name = c == &m.early ? "early" : "final";
        fig8.row().add(e.id).add(name).add_count(c->batches).add(to_string(m.mode));
        for (double v : c->regret_percentiles) fig8.add(v);
        fig9.row().add(e.id).add(name).add_count(c->batches).add(to_string(m.mode)).add(c->best_arm_play_rate)
            .add(c->best_arm_probability);
      }
      for (std::size_t b = 0; b < m.top_mass_trajectory.size(); ++b) {
        fig10.row().add(e.id).add(to_string(m.mode)).add_count(b + 1).add(m.best_arm_probability_trajectory[b]);
        for (double v : m.top_mass_trajectory[b]) fig10.add(v);
        for (std::size_t j = m.top_mass_trajectory[b].size(); j < a.top_j; ++j) fig10.add(std::optional<double>{});
      }
    }
    Json ej{{"experiment_id", e.id},
            {"arms", truth.size()},
            {"best_arm", truth.arm_ids[truth.best_arm()]},
            {"best_mean", number(truth.best_mean())},
            {"early_batches", rep.early_batches},
            {"modes", mj}};
    if (rep.early_change && rep.final_change) {
      ej["change"] = Json{{"early", change_json(*rep.early_change)}, {"final", change_json(*rep.final_change)}};
      for (const auto* c : {&*rep.early_change, &*rep.final_change}) {
        const bool early = c == &*rep.early_change;
        fig8.row().add(e.id).add(early ? "early" : "final").add_count(early ? rep.early_batches : a.batches)
            .add("relative_change");
        for (const auto& v : c->percentiles) fig8.add(v);
      }
      if (rep.final_change->division_by_zero) {
        err << "warning: experiment '" << e.id << "': uniform-prior regret is 0, relative change undefined\n";
      }
    }
    exps.push_back(std::move(ej));
  }
  return {{"report.json", cli::render_json(Json{{"manifest", man}, {"experiments", exps}})},
          {"fig8.csv", fig8.render(man)},
          {"fig9.csv", fig9.render(man)},
          {"fig10.csv", fig10.render(man)}};
}

// ---- output -----------------------------------------------------------------

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw InvalidInput("failed writing '" + path.string() + "'");
}

void emit(const std::vector<Output>& outputs, const std::string& out_file, const std::string& out_dir,
          std::ostream& out) {
  for (const auto& o : outputs) {
    if (o.name == "-") {
      if (out_file.empty()) {
        out << o.content;
      } else {
        write_file(out_file, o.content);
      }
      continue;
    }
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / o.name, o.content);
    out << (fs::path(out_dir) / o.name).string() << '\n';
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// ---- verify -----------------------------------------------------------------

Json read_manifest(const std::string& text, const std::string& path) {
  try {
    if (text.rfind("# manifest ", 0) == 0) {
      return Json::parse(text.substr(11, text.find('\n') - 11));
    }
    return Json::parse(text).at("manifest");
  } catch (const nlohmann::json::exception&) {
    throw InvalidInput("'" + path + "' carries no readable manifest");
  }
}

int verify(const std::string& report_path, unsigned threads, std::ostream& out, std::ostream& err) {
  const std::string text = read_file(report_path);
  const Json man = read_manifest(text, report_path);
  if (man.value("tool", "") != kTool) throw InvalidInput("manifest was not written by " + std::string(kTool));
  bool ok = true;
  for (const auto& f : man.at("inputs")) {
    const std::string path = f.at("path").get<std::string>();
    const std::string want = f.at("sha256").get<std::string>();
    const std::string got = cli::sha256_file(path);
    if (got != want) {
      err << "input digest mismatch: " << path << " (" << got << " != " << want << ")\n";
      ok = false;
    } else {
      out << "input " << path << " sha256 ok\n";
    }
  }
  if (!ok) return kExitMismatch;
  if (man.value("version", "") != EBSHRINK_VERSION) {
    err << "warning: report was written by version " << man.value("version", "?") << '\n';
  }

  const std::string command = man.at("command").get<std::string>();
  const Json& config = man.at("config");
  std::vector<Output> outputs;
  std::ostringstream sink;
  if (command == "estimate") {
    outputs = run_estimate(estimate_from_json(config), sink);
  } else if (command == "static-sim") {
    outputs = run_static_cmd(static_from_json(config), threads);
  } else if (command == "bandit-sim") {
    outputs = run_bandit_cmd(bandit_from_json(config), threads, sink);
  } else {
    throw InvalidInput("manifest names unknown command '" + command + "'");
  }

  const fs::path dir = fs::path(report_path).parent_path();
  for (const auto& o : outputs) {
    fs::path target;
    if (o.name == "-") {
      target = report_path;
    } else {
      target = dir / o.name;
      if (!fs::exists(target)) {
        if (o.name == "report.json") {
          err << "missing " << target.string() << '\n';
          ok = false;
        }
        continue;
      }
    }
    if (read_file(target) == o.content) {
      out << target.string() << " reproduced\n";
    } else {
      err << target.string() << " differs from a fresh run\n";
      ok = false;
    }
  }
  out << (ok ? "verify: ok\n" : "verify: MISMATCH\n");
  return ok ? kExitOk : kExitMismatch;
}

// ---- make-scenario ------------------------------------------------------------

struct ScenarioArgs {
  std::string kind = "normal";
  std::uint32_t arms = 16;
  std::uint64_t seed = 1;
  double center = 0.0;
  double spread = 1.0;
  double std_err = 1.0;
  std::uint64_t n = 1000;
  double rate = 0.025;
  double concentration = 400.0;
};

std::string make_scenario(const ScenarioArgs& a) {
  std::vector<ArmSummary> arms;
  std::ostringstream head;
  head << "# ebshrink " << EBSHRINK_VERSION << " make-scenario --kind " << a.kind << " --arms " << a.arms
       << " --seed " << a.seed << " --n " << a.n;
  if (a.kind == "normal") {
    arms = generate_normal({a.arms, a.center, a.spread, a.std_err, a.n}, a.seed);
    head << " --center " << format_number(a.center) << " --spread " << format_number(a.spread) << " --std-err "
         << format_number(a.std_err);
  } else if (a.kind == "conversion") {
    arms = generate_conversion({a.arms, a.rate, a.concentration, a.n}, a.seed);
    head << " --rate " << format_number(a.rate) << " --concentration " << format_number(a.concentration);
  } else {
    throw InvalidInput("unknown scenario kind '" + a.kind + "'");
  }
  std::ostringstream s;
  s << head.str() << '\n';
  write_summaries(s, arms);
  return s.str();
}

// ---- dispatch -----------------------------------------------------------------

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Empirical-Bayes shrinkage for A/B test arms, with simulation harnesses", kTool};
  app.set_version_flag("--version", EBSHRINK_VERSION);
  app.require_subcommand(0, 1);

  std::string verify_path;
  unsigned threads = 0;
  app.add_option("--verify", verify_path, "Check a report's input digests and reproduce it");
  app.add_option("--threads", threads,
                 std::string("Worker threads (default: $") + kThreadsEnv + " or all cores)");

  const auto dofs = CLI::IsMember({"k-3", "k-1"});

  EstimateArgs est;
  std::string est_out;
  auto* c_est = app.add_subcommand("estimate", "Shrink per-arm means of each experiment in a CSV file");
  c_est->add_option("input", est.input, "Experiment CSV")->required()->check(CLI::ExistingFile);
  c_est->add_option("--level", est.level, "Interval confidence level")->capture_default_str();
  c_est->add_option("--dof", est.dof, "Shrinkage degrees of freedom")->check(dofs)->capture_default_str();
  c_est->add_option("--variance", est.variance, "Interval variance")
      ->check(CLI::IsMember({"appendix", "main-text", "naive", "mixture"}))
      ->capture_default_str();
  c_est->add_option("--noise", est.noise, "Sampling-noise model")
      ->check(CLI::IsMember({"per-arm", "pooled"}))
      ->capture_default_str();
  c_est->add_option("--format", est.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  c_est->add_option("--out", est_out, "Write to this file instead of stdout");

  StaticArgs st;
  std::string st_dir = ".";
  auto* c_st = app.add_subcommand("static-sim", "Parametric-bootstrap comparison of shrunk and raw means");
  c_st->add_option("input", st.input, "Scenario CSV")->required()->check(CLI::ExistingFile);
  c_st->add_option("--replications", st.replications)->capture_default_str();
  c_st->add_option("--fraction", st.fraction, "Downsampling fraction")->capture_default_str();
  c_st->add_option("--level", st.level)->capture_default_str();
  c_st->add_option("--seed", st.seed)->capture_default_str();
  c_st->add_option("--arms-curve", st.arms_curve, "Arm counts for the subsampling curve, e.g. 4,8,16")
      ->delimiter(',');
  c_st->add_option("--dof", st.dof)->check(dofs)->capture_default_str();
  c_st->add_option("--threads", threads);
  c_st->add_option("--out-dir", st_dir, "Directory for report.json and fig3-fig7.csv")->capture_default_str();

  BanditArgs bd;
  std::string bd_dir = ".";
  auto* c_bd = app.add_subcommand("bandit-sim", "Thompson sampling with EB and uniform Beta priors");
  c_bd->add_option("input", bd.input, "Scenario CSV; arm means are the true rates")
      ->required()
      ->check(CLI::ExistingFile);
  c_bd->add_option("--batches", bd.batches)->capture_default_str();
  c_bd->add_option("--batch-size", bd.batch_size)->capture_default_str();
  c_bd->add_option("--draws", bd.draws, "Posterior draws per batch")->capture_default_str();
  c_bd->add_option("--replications", bd.replications)->capture_default_str();
  c_bd->add_option("--prior", bd.prior)->check(CLI::IsMember({"eb", "uniform", "both"}))->capture_default_str();
  c_bd->add_option("--refit", bd.refit, "Data the EB prior is refit on")
      ->check(CLI::IsMember({"cumulative", "last-batch"}))
      ->capture_default_str();
  c_bd->add_option("--early-fraction", bd.early_fraction)->capture_default_str();
  c_bd->add_option("--top-j", bd.top_j)->capture_default_str();
  c_bd->add_option("--seed", bd.seed)->capture_default_str();
  c_bd->add_option("--threads", threads);
  c_bd->add_option("--out-dir", bd_dir, "Directory for report.json and fig8-fig10.csv")->capture_default_str();

  ScenarioArgs sc;
  std::string sc_out;
  auto* c_sc = app.add_subcommand("make-scenario", "Write a synthetic truth CSV");
  c_sc->add_option("--kind", sc.kind)->check(CLI::IsMember({"normal", "conversion"}))->capture_default_str();
  c_sc->add_option("--arms", sc.arms)->capture_default_str();
  c_sc->add_option("--seed", sc.seed)->capture_default_str();
  c_sc->add_option("--n", sc.n, "Per-arm sample size")->capture_default_str();
  c_sc->add_option("--center", sc.center, "normal: mean of the true means")->capture_default_str();
  c_sc->add_option("--spread", sc.spread, "normal: sd of the true means")->capture_default_str();
  c_sc->add_option("--std-err", sc.std_err, "normal: per-arm standard error")->capture_default_str();
  c_sc->add_option("--rate", sc.rate, "conversion: mean rate")->capture_default_str();
  c_sc->add_option("--concentration", sc.concentration, "conversion: alpha + beta")->capture_default_str();
  c_sc->add_option("--out", sc_out, "Write to this file instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream help, msg;
    const int code = app.exit(e, help, msg);
    out << help.str();
    err << msg.str();
    return code == 0 ? kExitOk : kExitInvalid;
  }

  const unsigned workers = resolve_threads(threads);
  if (!verify_path.empty()) return verify(verify_path, workers, out, err);
  if (*c_est) {
    emit(run_estimate(est, err), est_out, ".", out);
  } else if (*c_st) {
    emit(run_static_cmd(st, workers), "", st_dir, out);
  } else if (*c_bd) {
    emit(run_bandit_cmd(bd, workers, err), "", bd_dir, out);
  } else if (*c_sc) {
    emit({{"-", make_scenario(sc)}}, sc_out, ".", out);
  } else {
    out << app.help();
    return kExitInvalid;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const NumericalDegeneracy& e) {
    err << "error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace ebshrink
