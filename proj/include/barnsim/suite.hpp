#ifndef BARNSIM_SUITE_HPP
#define BARNSIM_SUITE_HPP

#include <string>
#include <vector>

#include "barnsim/sim.hpp"

namespace barnsim {

struct SuiteResult {
  SuiteReport report;
  std::vector<int> skipped_envs;           // seeds that failed generation
  std::vector<std::string> traces;         // one per record, when requested
  std::vector<std::string> trace_names;
};

// Generates env_count environments from seed_base, runs trials_per_env
// trials each across a worker pool, and aggregates. The report is a pure
// function of the config: worker count and scheduling never change it.
SuiteResult run_suite(const SuiteConfig& config);

// Writes report.csv, summary.json, run_config.txt and any traces.
void write_suite_outputs(const SuiteResult& result, const SuiteConfig& config,
                         const std::string& out_dir);

std::uint64_t trial_seed_for(std::uint64_t seed_base, int env_id, int trial);

// Environment seeds are spaced 128 apart: the generator's rejection loop
// reseeds with seed XOR attempt (attempt < 128), so spaced seeds can never
// share a retry chain and every suite environment is distinct.
std::uint64_t env_seed_for(std::uint64_t seed_base, int env_id);

}  // namespace barnsim

#endif
