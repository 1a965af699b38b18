#include "barnsim/suite.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "barnsim/rng.hpp"

namespace barnsim {

std::uint64_t trial_seed_for(std::uint64_t seed_base, int env_id, int trial) {
  return mix_seed(mix_seed(seed_base, static_cast<std::uint64_t>(env_id)),
                  static_cast<std::uint64_t>(trial));
}

std::uint64_t env_seed_for(std::uint64_t seed_base, int env_id) {
  return seed_base + 128ULL * static_cast<std::uint64_t>(env_id);
}

SuiteResult run_suite(const SuiteConfig& config) {
  SuiteResult result;
  const TubeLibrary library = build_tube_library(config.tubes, config.beam);

  struct Task {
    int env_index;  // into envs
    int env_id;
    int trial;
  };
  std::vector<EnvSpec> envs;
  std::vector<Task> tasks;
  for (int e = 0; e < config.env_count; ++e) {
    const std::uint64_t env_seed = env_seed_for(config.seed_base, e);
    try {
      envs.push_back(generate_environment(env_seed, config.ca));
    } catch (const EnvGenError&) {
      result.skipped_envs.push_back(e);
      continue;
    }
    for (int t = 0; t < config.trials_per_env; ++t)
      tasks.push_back({static_cast<int>(envs.size()) - 1, e, t});
  }

  std::vector<TrialRecord> records(tasks.size());
  std::vector<std::string> traces(config.emit_traces ? tasks.size() : 0);
  std::vector<std::string> trace_names(config.emit_traces ? tasks.size() : 0);

  // Trials are independent; results land in pre-assigned slots so the
  // report is identical for any worker count.
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      const std::uint64_t trial_seed =
          trial_seed_for(config.seed_base, task.env_id, task.trial);
      std::string* trace = config.emit_traces ? &traces[i] : nullptr;
      try {
        records[i] = run_trial(envs[task.env_index], config, library,
                               task.env_id, trial_seed, trace);
      } catch (const std::exception& e) {
        // A planner fault fails the trial, never the suite.
        TrialRecord r;
        r.env_id = task.env_id;
        r.seed = trial_seed;
        r.outcome = Outcome::kTimeout;
        r.actual_time = config.sim.timeout;
        r.optimal_time = optimal_time(envs[task.env_index].path_length,
                                      config.score.max_speed);
        r.score = 0.0;
        r.note = std::string("internal error: ") + e.what();
        records[i] = r;
      }
      if (config.emit_traces) {
        char name[64];
        std::snprintf(name, sizeof(name), "env%03d_trial%02d.trace",
                      task.env_id, task.trial);
        trace_names[i] = name;
      }
    }
  };
  const int n_workers = std::max(1, config.workers);
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  result.report = aggregate(records, config.env_count, config.trials_per_env);
  result.traces = std::move(traces);
  result.trace_names = std::move(trace_names);
  return result;
}

void write_suite_outputs(const SuiteResult& result, const SuiteConfig& config,
                         const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto write_file = [&](const std::string& name, const std::string& content) {
    const fs::path path = fs::path(out_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
  };
  write_file("report.csv", report_to_csv(result.report));
  write_file("summary.json",
             report_to_summary_json(result.report, result.skipped_envs));
  write_file("run_config.txt", config_to_text(config));
  for (std::size_t i = 0; i < result.traces.size(); ++i) {
    if (!result.trace_names[i].empty())
      write_file(result.trace_names[i], result.traces[i]);
  }
}

}  // namespace barnsim
