#include <doctest.h>

#include "barnsim/suite.hpp"

using namespace barnsim;

TEST_SUITE_BEGIN("sim");

namespace {

EnvSpec open_course() {
  // Empty walled 5 m arena, straight shot from bottom to top.
  EnvSpec env;
  env.grid = OccupancyGrid(100, 100, 0.05);
  for (int i = 0; i < 100; ++i) {
    env.grid.set(i, 0, true);
    env.grid.set(i, 99, true);
    env.grid.set(0, i, true);
    env.grid.set(99, i, true);
  }
  env.start = Pose2(2.525, 0.625, M_PI / 2.0);
  env.goal = Vec2(2.525, 4.425);
  env.path_length = optimal_path_length(env.grid, env.start.position(),
                                        env.goal);
  env.seed = 0;
  return env;
}

SuiteConfig small_config() {
  SuiteConfig config;
  config.env_count = 1;
  config.trials_per_env = 1;
  return config;
}

}  // namespace

TEST_CASE("open course: straight run succeeds at the 0.25 clip bound") {
  const EnvSpec env = open_course();
  const SuiteConfig config = small_config();
  const TubeLibrary lib = build_tube_library(config.tubes, config.beam);
  const TrialRecord r = run_trial(env, config, lib, 0, 7);
  CHECK(r.outcome == Outcome::kSuccess);
  CHECK(r.score == doctest::Approx(0.25).epsilon(1e-12));
  // AT is roughly distance / commanded speed (0.7 m/s clip profile).
  const double distance =
      (env.goal - env.start.position()).norm() - config.sim.goal_tolerance;
  CHECK(r.actual_time > distance / 0.7 * 0.8);
  CHECK(r.actual_time < distance / 0.7 * 2.0);
}

TEST_CASE("start pose in contact is an immediate collision") {
  EnvSpec env = open_course();
  int sx, sy;
  env.grid.world_to_cell(env.start.position(), sx, sy);
  env.grid.set(sx, sy, true);
  const SuiteConfig config = small_config();
  const TubeLibrary lib = build_tube_library(config.tubes, config.beam);
  const TrialRecord r = run_trial(env, config, lib, 0, 7);
  CHECK(r.outcome == Outcome::kCollision);
  CHECK(r.actual_time == 0.0);
  CHECK(r.score == 0.0);
}

TEST_CASE("run_trial is deterministic: identical trace bytes") {
  const EnvSpec env = generate_environment(env_seed_for(5, 0), CaParams{});
  const SuiteConfig config = small_config();
  const TubeLibrary lib = build_tube_library(config.tubes, config.beam);
  std::string trace_a, trace_b;
  const TrialRecord a = run_trial(env, config, lib, 0, 99, &trace_a);
  const TrialRecord b = run_trial(env, config, lib, 0, 99, &trace_b);
  CHECK(a.outcome == b.outcome);
  CHECK(a.actual_time == b.actual_time);
  CHECK(trace_a == trace_b);
  CHECK(trace_a.find("# barnsim trace v1") == 0);

  // Different trial seeds jitter the start, so traces differ.
  std::string trace_c;
  run_trial(env, config, lib, 0, 100, &trace_c);
  CHECK(trace_c != trace_a);
}

TEST_CASE("config text round-trips exactly, rejects unknown keys") {
  SuiteConfig config;
  config.env_count = 7;
  config.profile = Profile::kTubeFsmMpc;
  config.sim.dt = 0.025;
  config.tubes.curvature_max = 1.75;
  config.fsm.velocity_clip = 0.65;
  const std::string text = config_to_text(config);
  const SuiteConfig back = config_from_text(text);
  CHECK(config_to_text(back) == text);
  CHECK(back.env_count == 7);
  CHECK(back.profile == Profile::kTubeFsmMpc);
  CHECK(back.sim.dt == 0.025);
  CHECK(back.tubes.curvature_max == 1.75);
  CHECK(back.fsm.velocity_clip == 0.65);
  CHECK_THROWS(config_from_text("nonsense_key=1\n"));
  CHECK_THROWS(config_from_text("no equals sign"));
}

TEST_CASE("single-trial suite produces one record and its files' content") {
  SuiteConfig config = small_config();
  config.seed_base = 3;
  const SuiteResult result = run_suite(config);
  CHECK(result.report.records.size() == 1);
  CHECK(result.report.complete);
  const std::string csv = report_to_csv(result.report);
  CHECK(csv.find("env_id,seed,outcome") == 0);
}

TEST_CASE("worker count does not change the report") {
  SuiteConfig config;
  config.env_count = 3;
  config.trials_per_env = 2;
  config.seed_base = 11;
  config.workers = 1;
  const SuiteResult a = run_suite(config);
  config.workers = 4;
  const SuiteResult b = run_suite(config);
  CHECK(report_to_csv(a.report) == report_to_csv(b.report));
  CHECK(report_to_summary_json(a.report, a.skipped_envs) ==
        report_to_summary_json(b.report, b.skipped_envs));
}

TEST_CASE("replay reproduces a recorded trace exactly") {
  const EnvSpec env = generate_environment(env_seed_for(21, 0), CaParams{});
  SuiteConfig config = small_config();
  config.seed_base = 21;
  const TubeLibrary lib = build_tube_library(config.tubes, config.beam);
  std::string trace;
  run_trial(env, config, lib, 0, trial_seed_for(21, 0, 0), &trace);
  CHECK(replay_trace(trace) == "");

  // A tampered trace is detected.
  std::string bad = trace;
  const auto pos = bad.find("x=");
  bad[pos + 2] = bad[pos + 2] == '1' ? '2' : '1';
  CHECK(replay_trace(bad) != "");
}

TEST_SUITE_END();
