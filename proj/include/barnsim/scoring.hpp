#ifndef BARNSIM_SCORING_HPP
#define BARNSIM_SCORING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "barnsim/types.hpp"

namespace barnsim {

enum class Outcome { kSuccess, kCollision, kTimeout };

const char* to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct TrialRecord {
  int env_id = 0;
  std::uint64_t seed = 0;  // trial seed
  Outcome outcome = Outcome::kTimeout;
  Scalar actual_time = 0.0;   // AT, seconds
  Scalar optimal_time = 0.0;  // OT, seconds
  Scalar score = 0.0;
  std::string note;  // diagnostic for non-nominal trials
};

struct ScoreParams {
  Scalar clip_low = 4.0;   // AT clipped into [clip_low * OT, clip_high * OT]
  Scalar clip_high = 8.0;
  Scalar max_speed = 2.0;  // m/s, for optimal_time
};

// OT = path_length / max_speed.
Scalar optimal_time(Scalar path_length, Scalar max_speed);

// score = 1_success * OT / clip(AT, clip_low*OT, clip_high*OT).
// Collision and timeout both score zero.
Scalar score_trial(Outcome outcome, Scalar actual_time, Scalar optimal_time,
                   const ScoreParams& params = {});

struct SuiteReport {
  std::vector<TrialRecord> records;  // sorted by (env_id, trial index)
  std::vector<Scalar> per_env_mean;  // mean score per environment
  std::vector<int> env_ids;
  Scalar overall_score = 0.0;  // mean over all trials
  Scalar success_rate = 0.0;
  // Percentiles of AT over successful trials (simulated seconds).
  Scalar at_p50 = 0.0;
  Scalar at_p90 = 0.0;
  Scalar at_max = 0.0;
  int expected_trials = 0;  // declared suite layout
  bool complete = true;     // false when records are missing vs the layout
};

// Deterministic aggregation; flags incomplete coverage instead of silently
// averaging a partial suite.
SuiteReport aggregate(const std::vector<TrialRecord>& records,
                      int env_count, int trials_per_env);

// CSV table: header then one row per record, 6 decimal places.
std::string report_to_csv(const SuiteReport& report);
std::vector<TrialRecord> records_from_csv(const std::string& csv);

// Structured summary (JSON); values rounded to 6 decimals for diffability.
std::string report_to_summary_json(const SuiteReport& report,
                                   const std::vector<int>& skipped_envs = {});

}  // namespace barnsim

#endif
