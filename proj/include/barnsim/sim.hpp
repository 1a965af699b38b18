#ifndef BARNSIM_SIM_HPP
#define BARNSIM_SIM_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "barnsim/env_gen.hpp"
#include "barnsim/fsm.hpp"
#include "barnsim/motion_tube.hpp"
#include "barnsim/scoring.hpp"
#include "barnsim/sensor.hpp"

namespace barnsim {

enum class Profile { kTube, kTubeFsmFi, kTubeFsmMpc };

const char* to_string(Profile p);
Profile profile_from_string(const std::string& s);

struct SimParams {
  Scalar dt = 0.05;            // 20 Hz control tick; scan every tick
  Scalar timeout = 100.0;      // simulated seconds per trial
  Scalar replan_period = 1.0;  // global plan recomputed at 1 Hz
  Scalar goal_tolerance = 0.5;
  Scalar max_speed = 2.0;      // platform limit, m/s
  Scalar max_omega = 4.0;      // platform limit, rad/s
  Scalar inflation_radius = 0.45;  // observed-costmap soft-cost band
  Scalar inscribed_radius = 0.29;  // planner refuses cells this close
  Scalar cost_weight = 0.5;        // planner cell-cost weight
  Scalar sensor_noise_sigma = 0.0;
  // Per-trial start perturbation so repeated trials in one environment
  // differ; kept small and collision-checked.
  Scalar start_jitter_xy = 0.02;
  Scalar start_jitter_theta = 0.05;
};

struct SuiteConfig {
  int env_count = 50;
  int trials_per_env = 10;
  std::uint64_t seed_base = 1;
  Profile profile = Profile::kTubeFsmFi;
  int workers = 1;
  bool emit_traces = false;
  bool emit_scan_ranges = false;  // embed ranges in trace lines
  SimParams sim;
  TubeParams tubes;
  FsmConfig fsm;
  BeamConfig beam;
  CaParams ca;
  ScoreParams score;
  Scalar footprint_length = 0.508;
  Scalar footprint_width = 0.430;
};

// Flat line-oriented key=value form; round-trips exactly. Unknown keys are
// an error so typos in config files fail loudly.
std::string config_to_text(const SuiteConfig& config);
SuiteConfig config_from_text(const std::string& text);
SuiteConfig load_config(const std::string& path);

// Runs one trial: scan -> costmap update -> plan (at the replan rate) ->
// FSM tick -> safety gate -> integrate, until goal / collision / timeout.
// Deterministic in (env, config, trial_seed). When `trace_out` is non-null
// it receives the full line-oriented tick trace.
TrialRecord run_trial(const EnvSpec& env, const SuiteConfig& config,
                      const TubeLibrary& library, int env_id,
                      std::uint64_t trial_seed,
                      std::string* trace_out = nullptr);

// Re-executes the trial recorded in a trace file and compares the result
// tick by tick. Returns the empty string on an exact match, otherwise a
// description of the first divergence.
std::string replay_trace(const std::string& trace_text);

}  // namespace barnsim

#endif
