#include "ubsfc/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "ubsfc/analysis.hpp"
#include "ubsfc/config.hpp"
#include "ubsfc/engine.hpp"
#include "ubsfc/errors.hpp"

#ifndef UBSFC_VERSION
#define UBSFC_VERSION "0.1.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace ubsfc {
namespace {

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::optional<json> read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    return json::parse(in);
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

std::string names_list() {
  std::string s;
  for (const auto& n : scenario_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

struct RunOptions {
  std::string scenario;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<int> replicates;
  std::optional<int> steps;
  std::optional<int> burn_in;
  int jobs = 1;
  std::string expectation_mode;
  std::string expiry_mode;
  std::string sfc_mode;
  std::string matching;
  bool consistency_log = false;
  std::vector<std::string> overrides;
};

struct MetricsOptions {
  std::string in_dir;
  std::optional<int> burn_in;
  std::optional<double> hp_lambda;
};

std::vector<ScenarioConfig> resolve_scenarios(const RunOptions& opt) {
  ScenarioConfig base;
  const bool from_file = !opt.config_path.empty();
  if (from_file) base = load_config(opt.config_path);

  std::vector<std::string> names;
  if (opt.scenario == "all") names = scenario_names();
  else if (!opt.scenario.empty()) names = {opt.scenario};
  else if (!from_file) names = {"baseline"};

  std::vector<ScenarioConfig> out;
  if (names.empty()) out.push_back(base);
  for (const auto& name : names) {
    const auto preset = scenario_preset(name);
    ScenarioConfig c = base;
    c.name = preset->name;
    c.benefits.replacement_rate = preset->benefits.replacement_rate;
    c.benefits.max_duration = preset->benefits.max_duration;
    out.push_back(c);
  }
  for (auto& c : out) {
    if (opt.seed) c.seed = *opt.seed;
    if (opt.replicates) c.replicates = *opt.replicates;
    if (opt.steps) c.steps = *opt.steps;
    if (opt.burn_in) c.burn_in = *opt.burn_in;
    if (!opt.expectation_mode.empty()) set_config_value(c, "expectation_mode", opt.expectation_mode);
    if (!opt.expiry_mode.empty()) set_config_value(c, "expiry_mode", opt.expiry_mode);
    if (!opt.matching.empty()) set_config_value(c, "matching", opt.matching);
    if (opt.sfc_mode == "strict") c.strict_sfc = true;
    else if (opt.sfc_mode == "warn") c.strict_sfc = false;
    if (opt.consistency_log) c.consistency_log = true;
    for (const auto& kv : opt.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    validate(c);
  }
  return out;
}

json scenario_manifest(const ScenarioConfig& c, const std::string& started) {
  json j;
  j["scenario"] = c.name;
  j["replacement_rate"] = c.benefits.replacement_rate;
  j["max_duration"] = c.benefits.max_duration;
  j["expiry_mode"] = c.benefits.mode == ExpiryMode::calendar ? "calendar" : "spell";
  j["config_hash"] = config_hash(c);
  j["master_seed"] = c.seed;
  j["replicates"] = c.replicates;
  j["steps"] = c.steps;
  j["burn_in"] = c.burn_in;
  j["version"] = version_string();
  j["started"] = started;
  j["status"] = "running";
  return j;
}

void write_scenario_outputs(const fs::path& dir, const ScenarioResult& result, std::vector<TimeSeriesFrame>& frames) {
  const auto& c = result.config;
  for (const auto& r : result.replicates) {
    const fs::path rdir = dir / ("replicate_" + std::to_string(r.replicate));
    fs::create_directories(rdir);
    {
      std::ofstream ev(rdir / "events.csv", std::ios::binary);
      write_events_csv(ev, r.events);
    }
    {
      std::ofstream sn(rdir / "snapshots.csv", std::ios::binary);
      write_snapshots_csv(sn, r.snapshots);
    }
    if (c.consistency_log) {
      std::ofstream cs(rdir / "consistency.csv", std::ios::binary);
      cs << "step,row,residual\n";
      for (const auto& row : r.consistency_rows) cs << row;
    }
    frames.push_back(compute_metrics(r.events, snapshot_columns(), r.snapshots, c.households, c.name, r.replicate));
  }
  {
    std::ofstream fr(dir / "frames.csv", std::ios::binary);
    write_frames_csv(fr, frames);
  }
  {
    std::ofstream ag(dir / "aggregate.csv", std::ios::binary);
    write_aggregate_csv(ag, aggregate(frames, c.burn_in, c.hp_lambda));
  }
}

int command_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  if (!opt.scenario.empty() && opt.scenario != "all" && !scenario_preset(opt.scenario)) {
    err << "unknown scenario '" << opt.scenario << "'; valid names: " << names_list() << ", all\n";
    return kExitUsage;
  }
  std::vector<ScenarioConfig> configs;
  try {
    configs = resolve_scenarios(opt);
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return kExitUsage;
  }

  const fs::path root = opt.out_dir.empty() ? fs::path(default_output_root()) : fs::path(opt.out_dir);
  fs::create_directories(root);
  const std::string started = timestamp();

  json top;
  top["version"] = version_string();
  top["master_seed"] = configs.front().seed;
  top["scenarios"] = json::array();
  top["config_hashes"] = json::object();
  for (const auto& c : configs) {
    top["scenarios"].push_back(c.name);
    top["config_hashes"][c.name] = config_hash(c);
  }
  bool reproduction = false;
  if (auto previous = read_json(root / "manifest.json")) {
    reproduction = previous->value("config_hashes", json::object()) == top["config_hashes"] &&
                   previous->value("master_seed", json()) == top["master_seed"];
  }
  top["reproduction"] = reproduction;
  top["started"] = started;
  top["status"] = "running";
  top["outputs"] = json::array();
  write_json(root / "manifest.json", top);
  if (reproduction) out << "rerun with identical config hash and seed: flagged as reproduction\n";

  int exit_code = kExitOk;
  for (const auto& c : configs) {
    const fs::path dir = root / c.name;
    fs::create_directories(dir);
    json manifest = scenario_manifest(c, timestamp());
    if (auto previous = read_json(dir / "manifest.json")) {
      manifest["reproduction"] = previous->value("config_hash", std::string()) == manifest["config_hash"] &&
                                 previous->value("master_seed", json()) == manifest["master_seed"];
    } else {
      manifest["reproduction"] = false;
    }
    write_json(dir / "manifest.json", manifest);
    write_text(dir / "config.txt", serialize_config(c));

    const auto result = run_scenario(c, opt.jobs);
    std::vector<TimeSeriesFrame> frames;
    write_scenario_outputs(dir, result, frames);

    const auto stationary = solve_stationary_state(c);
    json deviations = json::array();
    for (const auto& d : stationary_deviations(stationary)) {
      deviations.push_back({{"name", d.name}, {"reference", d.reference}, {"solved", d.solved}});
    }
    manifest["stationary_state"] = {{"tax_rate", stationary.tax_rate},
                                    {"propensity_wealth", stationary.propensity_wealth},
                                    {"residual", stationary.residual},
                                    {"deviations_from_reference", deviations}};
    json reps = json::array();
    for (const auto& r : result.replicates) {
      json jr = {{"replicate", r.replicate}, {"seed", r.seed}, {"completed", r.completed},
                 {"steps", r.snapshots.size()}, {"flagged_steps", r.flagged_steps},
                 {"max_relative_residual", r.max_relative_residual}};
      if (!r.completed) {
        jr["error"] = r.error;
        jr["failed_step"] = r.failed_step;
      }
      reps.push_back(jr);
      if (r.sfc_failure) {
        err << "SFC abort: scenario " << c.name << " replicate " << r.replicate << " step " << r.failed_step
            << " residual " << r.failed_residual << " (" << r.error << ")\n";
        exit_code = std::max(exit_code, kExitSfc);
      } else if (!r.completed) {
        err << "replicate " << r.replicate << " of " << c.name << " failed: " << r.error << "\n";
        if (exit_code == kExitOk) exit_code = kExitFailure;
      }
    }
    manifest["replicate_status"] = reps;
    manifest["partial"] = result.partial;
    manifest["finished"] = timestamp();
    manifest["status"] = result.partial ? "partial" : "complete";
    manifest["outputs"] = {"config.txt", "frames.csv", "aggregate.csv", "replicate_<r>/events.csv",
                           "replicate_<r>/snapshots.csv"};
    write_json(dir / "manifest.json", manifest);
    top["outputs"].push_back((dir).string());
    out << c.name << ": " << result.replicates.size() << " replicates, " << c.steps << " steps"
        << (result.partial ? " (partial)" : "") << " -> " << dir.string() << "\n";
  }
  top["finished"] = timestamp();
  top["status"] = exit_code == kExitOk ? "complete" : "partial";
  write_json(root / "manifest.json", top);
  return exit_code;
}

int command_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  try {
    const auto c = load_config(path);
    validate(c);
    out << "ok: " << c.name << " (config hash " << config_hash(c) << ")\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return kExitUsage;
  }
}

int recompute_scenario(const fs::path& dir, const MetricsOptions& opt, std::ostream& out) {
  auto c = load_config((dir / "config.txt").string());
  if (opt.burn_in) c.burn_in = *opt.burn_in;
  if (opt.hp_lambda) c.hp_lambda = *opt.hp_lambda;
  std::vector<std::pair<int, fs::path>> reps;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && name.rfind("replicate_", 0) == 0) reps.emplace_back(std::stoi(name.substr(10)), entry.path());
  }
  std::sort(reps.begin(), reps.end());
  std::vector<TimeSeriesFrame> frames;
  for (const auto& [r, path] : reps) {
    std::ifstream ev(path / "events.csv");
    std::ifstream sn(path / "snapshots.csv");
    if (!ev || !sn) throw ConfigError("missing events.csv or snapshots.csv in " + path.string());
    const auto events = read_events_csv(ev);
    std::vector<Snapshot> rows;
    const auto columns = read_snapshots_csv(sn, rows);
    frames.push_back(compute_metrics(events, columns, rows, c.households, c.name, r));
  }
  {
    std::ofstream fr(dir / "frames.csv", std::ios::binary);
    write_frames_csv(fr, frames);
  }
  {
    std::ofstream ag(dir / "aggregate.csv", std::ios::binary);
    write_aggregate_csv(ag, aggregate(frames, c.burn_in, c.hp_lambda));
  }
  out << c.name << ": recomputed metrics from " << frames.size() << " replicates\n";
  return kExitOk;
}

int command_metrics(const MetricsOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const fs::path in(opt.in_dir);
    if (!fs::is_directory(in)) {
      err << "not a directory: " << in.string() << "\n";
      return kExitUsage;
    }
    if (fs::exists(in / "config.txt")) return recompute_scenario(in, opt, out);
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(in))
      if (entry.is_directory() && fs::exists(entry.path() / "config.txt")) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) {
      err << "no scenario directories under " << in.string() << "\n";
      return kExitUsage;
    }
    for (const auto& d : dirs) recompute_scenario(d, opt, out);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "metrics failed: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

std::string version_string() { return UBSFC_VERSION; }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Agent-based stock-flow consistent labour-market simulator", "ubsfc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario or all nine");
  run_cmd->add_option("--scenario", run.scenario, "Scenario name or 'all'");
  run_cmd->add_option("--config", run.config_path, "Config file (key = value)");
  run_cmd->add_option("--seed", run.seed, "Master seed");
  run_cmd->add_option("--out", run.out_dir, "Output root (default $UBSFC_OUTPUT_ROOT or ./out)");
  run_cmd->add_option("--replicates", run.replicates, "Replicates per scenario")->check(CLI::PositiveNumber);
  run_cmd->add_option("--steps", run.steps, "Steps per replicate")->check(CLI::PositiveNumber);
  run_cmd->add_option("--burn-in", run.burn_in, "Steps dropped before aggregation")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--jobs", run.jobs, "Parallel replicate workers")->check(CLI::PositiveNumber);
  run_cmd->add_option("--expectation-mode", run.expectation_mode, "adaptive | as-written")
      ->check(CLI::IsMember({"adaptive", "as-written"}));
  run_cmd->add_option("--expiry-mode", run.expiry_mode, "calendar | spell")
      ->check(CLI::IsMember({"calendar", "spell"}));
  run_cmd->add_option("--sfc", run.sfc_mode, "strict (abort) | warn")->check(CLI::IsMember({"strict", "warn"}));
  run_cmd->add_option("--matching", run.matching, "random | balanced")->check(CLI::IsMember({"random", "balanced"}));
  run_cmd->add_flag("--consistency-log", run.consistency_log, "Write per-step residuals");
  run_cmd->add_option("--set", run.overrides, "Override a config key (key=value), repeatable");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a config file");
  validate_cmd->add_option("--config", validate_path, "Config file")->required();

  MetricsOptions metrics;
  auto* metrics_cmd = app.add_subcommand("metrics", "Recompute metrics and aggregates from run logs");
  metrics_cmd->add_option("--in", metrics.in_dir, "Run output root or one scenario directory")->required();
  metrics_cmd->add_option("--burn-in", metrics.burn_in, "Override burn-in");
  metrics_cmd->add_option("--hp-lambda", metrics.hp_lambda, "Override the HP smoothing parameter");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run_cmd) return command_run(run, out, err);
    if (*validate_cmd) return command_validate(validate_path, out, err);
    if (*metrics_cmd) return command_metrics(metrics, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace ubsfc
