// Command-line front end: generate courses, run suites, rescore record
// files, and replay trial traces.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "barnsim/env_gen.hpp"
#include "barnsim/suite.hpp"

namespace fs = std::filesystem;
using namespace barnsim;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cmd_generate(std::uint64_t seed, int envs, const std::string& out_dir,
                 const SuiteConfig& config) {
  fs::create_directories(out_dir);
  for (int i = 0; i < envs; ++i) {
    const std::uint64_t env_seed = env_seed_for(seed, i);
    char stem[64];
    std::snprintf(stem, sizeof(stem), "env_%05llu",
                  static_cast<unsigned long long>(env_seed));
    try {
      const EnvSpec env = generate_environment(env_seed, config.ca);
      const fs::path base = fs::path(out_dir) / stem;
      save_env(env, base.string() + ".map", base.string() + ".meta");
      std::printf("%s: path_length=%.3f occupied=%.3f\n", stem,
                  env.path_length, interior_occupied_fraction(env.grid));
    } catch (const EnvGenError& e) {
      std::printf("%s: generation failed (%s)\n", stem, e.what());
    }
  }
  return 0;
}

int cmd_run(SuiteConfig config, const std::string& out_dir) {
  const SuiteResult result = run_suite(config);
  write_suite_outputs(result, config, out_dir);
  std::printf("suite complete: %zu trials, overall=%.6f success=%.6f\n",
              result.report.records.size(), result.report.overall_score,
              result.report.success_rate);
  if (!result.skipped_envs.empty())
    std::printf("skipped envs: %zu (see summary.json)\n",
                result.skipped_envs.size());
  return 0;  // trial failures are data, not process errors
}

int cmd_score(const std::string& records_path, const std::string& out_dir,
              const SuiteConfig& config) {
  std::vector<TrialRecord> records = records_from_csv(read_file(records_path));
  for (TrialRecord& r : records) {
    r.score =
        score_trial(r.outcome, r.actual_time, r.optimal_time, config.score);
  }
  const SuiteReport report =
      aggregate(records, config.env_count, config.trials_per_env);
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "report.csv", std::ios::binary);
    out << report_to_csv(report);
  }
  {
    std::ofstream out(fs::path(out_dir) / "summary.json", std::ios::binary);
    out << report_to_summary_json(report);
  }
  std::printf("rescored %zu records: overall=%.6f success=%.6f\n",
              report.records.size(), report.overall_score,
              report.success_rate);
  return 0;
}

int cmd_replay(const std::string& trace_path) {
  const std::string divergence = replay_trace(read_file(trace_path));
  if (divergence.empty()) {
    std::printf("replay ok: trace reproduced exactly\n");
    return 0;
  }
  std::printf("replay mismatch: %s\n", divergence.c_str());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BARN-style navigation benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int envs = -1;
  int trials = -1;
  int workers = -1;
  std::string profile;
  bool emit_traces = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file (key=value lines)");
    sub->add_option("--seed", seed, "base seed");
    sub->add_option("--out", out_dir, "output directory");
  };

  CLI::App* gen = app.add_subcommand("generate", "generate course maps only");
  add_common(gen);
  gen->add_option("--envs", envs, "number of environments");

  CLI::App* run = app.add_subcommand("run", "run a scored suite");
  add_common(run);
  run->add_option("--envs", envs, "number of environments");
  run->add_option("--trials", trials, "trials per environment");
  run->add_option("--workers", workers, "worker threads");
  run->add_option("--profile", profile,
                  "tube | tube+fsm-fi | tube+fsm-mpc");
  run->add_flag("--emit-traces", emit_traces, "write per-trial trace files");

  CLI::App* score = app.add_subcommand("score",
                                       "recompute scores from a record file");
  add_common(score);
  std::string records_path;
  score->add_option("--records", records_path, "report.csv to rescore")
      ->required();

  CLI::App* replay = app.add_subcommand("replay", "re-execute one trace");
  std::string trace_path;
  replay->add_option("trace", trace_path, "trace file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    SuiteConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    // Command-line flags override the config only when actually given.
    CLI::App* sub = app.get_subcommands().front();
    auto given = [&](const std::string& name) {
      return sub->get_option_no_throw(name) && sub->count(name) > 0;
    };
    if (given("--seed")) config.seed_base = seed;
    if (given("--envs")) config.env_count = envs;
    if (given("--trials")) config.trials_per_env = trials;
    if (given("--workers")) config.workers = workers;
    if (given("--profile")) config.profile = profile_from_string(profile);
    if (emit_traces) config.emit_traces = true;

    if (gen->parsed()) return cmd_generate(config.seed_base,
                                           config.env_count, out_dir, config);
    if (run->parsed()) return cmd_run(config, out_dir);
    if (score->parsed()) return cmd_score(records_path, out_dir, config);
    if (replay->parsed()) return cmd_replay(trace_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
