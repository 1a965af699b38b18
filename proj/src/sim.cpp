#include "barnsim/sim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "barnsim/planner.hpp"
#include "barnsim/rng.hpp"

namespace barnsim {

const char* to_string(Profile p) {
  switch (p) {
    case Profile::kTube: return "tube";
    case Profile::kTubeFsmFi: return "tube+fsm-fi";
    case Profile::kTubeFsmMpc: return "tube+fsm-mpc";
  }
  return "?";
}

Profile profile_from_string(const std::string& s) {
  if (s == "tube") return Profile::kTube;
  if (s == "tube+fsm-fi") return Profile::kTubeFsmFi;
  if (s == "tube+fsm-mpc") return Profile::kTubeFsmMpc;
  throw std::invalid_argument("unknown profile: " + s);
}

namespace {

std::string fmt_g(Scalar v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_f(Scalar v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string config_to_text(const SuiteConfig& c) {
  std::ostringstream out;
  out << "env_count=" << c.env_count << "\n";
  out << "trials_per_env=" << c.trials_per_env << "\n";
  out << "seed_base=" << c.seed_base << "\n";
  out << "profile=" << to_string(c.profile) << "\n";
  out << "workers=" << c.workers << "\n";
  out << "emit_traces=" << (c.emit_traces ? 1 : 0) << "\n";
  out << "emit_scan_ranges=" << (c.emit_scan_ranges ? 1 : 0) << "\n";
  out << "sim.dt=" << fmt_g(c.sim.dt) << "\n";
  out << "sim.timeout=" << fmt_g(c.sim.timeout) << "\n";
  out << "sim.replan_period=" << fmt_g(c.sim.replan_period) << "\n";
  out << "sim.goal_tolerance=" << fmt_g(c.sim.goal_tolerance) << "\n";
  out << "sim.max_speed=" << fmt_g(c.sim.max_speed) << "\n";
  out << "sim.max_omega=" << fmt_g(c.sim.max_omega) << "\n";
  out << "sim.inflation_radius=" << fmt_g(c.sim.inflation_radius) << "\n";
  out << "sim.inscribed_radius=" << fmt_g(c.sim.inscribed_radius) << "\n";
  out << "sim.cost_weight=" << fmt_g(c.sim.cost_weight) << "\n";
  out << "sim.sensor_noise_sigma=" << fmt_g(c.sim.sensor_noise_sigma) << "\n";
  out << "sim.start_jitter_xy=" << fmt_g(c.sim.start_jitter_xy) << "\n";
  out << "sim.start_jitter_theta=" << fmt_g(c.sim.start_jitter_theta) << "\n";
  out << "tube.velocity_level_count=" << c.tubes.velocity_level_count << "\n";
  out << "tube.velocity_min=" << fmt_g(c.tubes.velocity_min) << "\n";
  out << "tube.velocity_max=" << fmt_g(c.tubes.velocity_max) << "\n";
  out << "tube.curvatures_per_level=" << c.tubes.curvatures_per_level << "\n";
  out << "tube.curvature_max=" << fmt_g(c.tubes.curvature_max) << "\n";
  out << "tube.max_heading_change=" << fmt_g(c.tubes.max_heading_change)
      << "\n";
  out << "tube.horizon=" << fmt_g(c.tubes.horizon) << "\n";
  out << "tube.d_sample=" << fmt_g(c.tubes.d_sample) << "\n";
  out << "tube.inflation_margin=" << fmt_g(c.tubes.footprint.inflation_margin)
      << "\n";
  out << "tube.weight_profile="
      << (c.tubes.weight_profile == WeightProfile::kSoftmax ? "softmax"
                                                            : "inverse_cost")
      << "\n";
  out << "tube.weight_epsilon=" << fmt_g(c.tubes.weight_epsilon) << "\n";
  out << "tube.softmax_temperature=" << fmt_g(c.tubes.softmax_temperature)
      << "\n";
  out << "fsm.heading_tolerance=" << fmt_g(c.fsm.heading_tolerance) << "\n";
  out << "fsm.lookahead=" << fmt_g(c.fsm.lookahead) << "\n";
  out << "fsm.backtrack_distance=" << fmt_g(c.fsm.backtrack_distance) << "\n";
  out << "fsm.fi_inflation=" << fmt_g(c.fsm.fi_inflation) << "\n";
  out << "fsm.velocity_clip=" << fmt_g(c.fsm.velocity_clip) << "\n";
  out << "fsm.mpc_steps=" << c.fsm.mpc_steps << "\n";
  out << "fsm.mpc_dt=" << fmt_g(c.fsm.mpc_dt) << "\n";
  out << "fsm.stuck_window=" << fmt_g(c.fsm.stuck_window) << "\n";
  out << "fsm.stuck_displacement=" << fmt_g(c.fsm.stuck_displacement) << "\n";
  out << "fsm.recovered_duration=" << fmt_g(c.fsm.recovered_duration) << "\n";
  out << "fsm.reverse_speed=" << fmt_g(c.fsm.reverse_speed) << "\n";
  out << "fsm.forward_speed=" << fmt_g(c.fsm.forward_speed) << "\n";
  out << "fsm.heading_rate=" << fmt_g(c.fsm.heading_rate) << "\n";
  out << "fsm.heading_gain=" << fmt_g(c.fsm.heading_gain) << "\n";
  out << "fsm.roi_width=" << fmt_g(c.fsm.rear_roi.width) << "\n";
  out << "fsm.roi_depth=" << fmt_g(c.fsm.rear_roi.depth) << "\n";
  out << "fsm.roi_rear_offset=" << fmt_g(c.fsm.rear_roi.rear_offset) << "\n";
  out << "beam.fov=" << fmt_g(c.beam.fov) << "\n";
  out << "beam.count=" << c.beam.beam_count << "\n";
  out << "beam.max_range=" << fmt_g(c.beam.max_range) << "\n";
  out << "ca.width=" << c.ca.ca_width << "\n";
  out << "ca.height=" << c.ca.ca_height << "\n";
  out << "ca.resolution=" << fmt_g(c.ca.ca_resolution) << "\n";
  out << "ca.fill_probability=" << fmt_g(c.ca.fill_probability) << "\n";
  out << "ca.smoothing_iterations=" << c.ca.smoothing_iterations << "\n";
  out << "ca.neighbor_threshold=" << c.ca.neighbor_threshold << "\n";
  out << "ca.fine_resolution=" << fmt_g(c.ca.fine_resolution) << "\n";
  out << "ca.clearance_radius=" << fmt_g(c.ca.clearance_radius) << "\n";
  out << "ca.band_depth=" << fmt_g(c.ca.band_depth) << "\n";
  out << "ca.max_retries=" << c.ca.max_retries << "\n";
  out << "score.clip_low=" << fmt_g(c.score.clip_low) << "\n";
  out << "score.clip_high=" << fmt_g(c.score.clip_high) << "\n";
  out << "score.max_speed=" << fmt_g(c.score.max_speed) << "\n";
  out << "footprint.length=" << fmt_g(c.footprint_length) << "\n";
  out << "footprint.width=" << fmt_g(c.footprint_width) << "\n";
  return out.str();
}

SuiteConfig config_from_text(const std::string& text) {
  SuiteConfig c;
  Scalar tube_margin = c.tubes.footprint.inflation_margin;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    auto d = [&] { return std::stod(value); };
    auto i = [&] { return std::stoi(value); };
    if (key == "env_count") c.env_count = i();
    else if (key == "trials_per_env") c.trials_per_env = i();
    else if (key == "seed_base") c.seed_base = std::stoull(value);
    else if (key == "profile") c.profile = profile_from_string(value);
    else if (key == "workers") c.workers = i();
    else if (key == "emit_traces") c.emit_traces = i() != 0;
    else if (key == "emit_scan_ranges") c.emit_scan_ranges = i() != 0;
    else if (key == "sim.dt") c.sim.dt = d();
    else if (key == "sim.timeout") c.sim.timeout = d();
    else if (key == "sim.replan_period") c.sim.replan_period = d();
    else if (key == "sim.goal_tolerance") c.sim.goal_tolerance = d();
    else if (key == "sim.max_speed") c.sim.max_speed = d();
    else if (key == "sim.max_omega") c.sim.max_omega = d();
    else if (key == "sim.inflation_radius") c.sim.inflation_radius = d();
    else if (key == "sim.inscribed_radius") c.sim.inscribed_radius = d();
    else if (key == "sim.cost_weight") c.sim.cost_weight = d();
    else if (key == "sim.sensor_noise_sigma") c.sim.sensor_noise_sigma = d();
    else if (key == "sim.start_jitter_xy") c.sim.start_jitter_xy = d();
    else if (key == "sim.start_jitter_theta") c.sim.start_jitter_theta = d();
    else if (key == "tube.velocity_level_count")
      c.tubes.velocity_level_count = i();
    else if (key == "tube.velocity_min") c.tubes.velocity_min = d();
    else if (key == "tube.velocity_max") c.tubes.velocity_max = d();
    else if (key == "tube.curvatures_per_level")
      c.tubes.curvatures_per_level = i();
    else if (key == "tube.curvature_max") c.tubes.curvature_max = d();
    else if (key == "tube.max_heading_change")
      c.tubes.max_heading_change = d();
    else if (key == "tube.horizon") c.tubes.horizon = d();
    else if (key == "tube.d_sample") c.tubes.d_sample = d();
    else if (key == "tube.inflation_margin") tube_margin = d();
    else if (key == "tube.weight_profile")
      c.tubes.weight_profile = value == "softmax" ? WeightProfile::kSoftmax
                                                  : WeightProfile::kInverseCost;
    else if (key == "tube.weight_epsilon") c.tubes.weight_epsilon = d();
    else if (key == "tube.softmax_temperature")
      c.tubes.softmax_temperature = d();
    else if (key == "fsm.heading_tolerance") c.fsm.heading_tolerance = d();
    else if (key == "fsm.lookahead") c.fsm.lookahead = d();
    else if (key == "fsm.backtrack_distance") c.fsm.backtrack_distance = d();
    else if (key == "fsm.fi_inflation") c.fsm.fi_inflation = d();
    else if (key == "fsm.velocity_clip") c.fsm.velocity_clip = d();
    else if (key == "fsm.mpc_steps") c.fsm.mpc_steps = i();
    else if (key == "fsm.mpc_dt") c.fsm.mpc_dt = d();
    else if (key == "fsm.stuck_window") c.fsm.stuck_window = d();
    else if (key == "fsm.stuck_displacement") c.fsm.stuck_displacement = d();
    else if (key == "fsm.recovered_duration") c.fsm.recovered_duration = d();
    else if (key == "fsm.reverse_speed") c.fsm.reverse_speed = d();
    else if (key == "fsm.forward_speed") c.fsm.forward_speed = d();
    else if (key == "fsm.heading_rate") c.fsm.heading_rate = d();
    else if (key == "fsm.heading_gain") c.fsm.heading_gain = d();
    else if (key == "fsm.roi_width") c.fsm.rear_roi.width = d();
    else if (key == "fsm.roi_depth") c.fsm.rear_roi.depth = d();
    else if (key == "fsm.roi_rear_offset") c.fsm.rear_roi.rear_offset = d();
    else if (key == "beam.fov") c.beam.fov = d();
    else if (key == "beam.count") c.beam.beam_count = i();
    else if (key == "beam.max_range") c.beam.max_range = d();
    else if (key == "ca.width") c.ca.ca_width = i();
    else if (key == "ca.height") c.ca.ca_height = i();
    else if (key == "ca.resolution") c.ca.ca_resolution = d();
    else if (key == "ca.fill_probability") c.ca.fill_probability = d();
    else if (key == "ca.smoothing_iterations")
      c.ca.smoothing_iterations = i();
    else if (key == "ca.neighbor_threshold") c.ca.neighbor_threshold = i();
    else if (key == "ca.fine_resolution") c.ca.fine_resolution = d();
    else if (key == "ca.clearance_radius") c.ca.clearance_radius = d();
    else if (key == "ca.band_depth") c.ca.band_depth = d();
    else if (key == "ca.max_retries") c.ca.max_retries = i();
    else if (key == "score.clip_low") c.score.clip_low = d();
    else if (key == "score.clip_high") c.score.clip_high = d();
    else if (key == "score.max_speed") c.score.max_speed = d();
    else if (key == "footprint.length") c.footprint_length = d();
    else if (key == "footprint.width") c.footprint_width = d();
    else
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": unknown key '" + key + "'");
  }
  c.tubes.footprint = make_rectangle_footprint(c.footprint_length,
                                               c.footprint_width, tube_margin);
  c.fsm.footprint =
      make_rectangle_footprint(c.footprint_length, c.footprint_width, 0.0);
  return c;
}

SuiteConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_config: cannot open " + path);
  std::stringstream text;
  text << in.rdbuf();
  return config_from_text(text.str());
}

namespace {

Pose2 jittered_start(const EnvSpec& env, const SuiteConfig& config,
                     const Footprint& physical, Xoshiro256ss& rng) {
  const SimParams& sim = config.sim;
  Scalar jx = rng.uniform(-sim.start_jitter_xy, sim.start_jitter_xy);
  Scalar jy = rng.uniform(-sim.start_jitter_xy, sim.start_jitter_xy);
  Scalar jt = rng.uniform(-sim.start_jitter_theta, sim.start_jitter_theta);
  for (int attempt = 0; attempt < 5; ++attempt) {
    const Pose2 cand(env.start.x + jx, env.start.y + jy,
                     normalize_angle(env.start.theta + jt));
    if (!footprint_collides(env.grid, cand, physical)) return cand;
    jx *= 0.5;
    jy *= 0.5;
    jt *= 0.5;
  }
  return env.start;
}

Twist platform_clamp(const Twist& cmd, const SimParams& sim, bool& clamped) {
  Twist out = cmd;
  clamped = false;
  if (std::abs(out.v) > sim.max_speed) {
    out.v = std::copysign(sim.max_speed, out.v);
    clamped = true;
  }
  if (std::abs(out.omega) > sim.max_omega) {
    out.omega = std::copysign(sim.max_omega, out.omega);
    clamped = true;
  }
  return out;
}

}  // namespace

TrialRecord run_trial(const EnvSpec& env, const SuiteConfig& config,
                      const TubeLibrary& library, int env_id,
                      std::uint64_t trial_seed, std::string* trace_out) {
  TrialRecord record;
  record.env_id = env_id;
  record.seed = trial_seed;
  record.optimal_time = optimal_time(env.path_length, config.score.max_speed);

  std::ostringstream trace;
  if (trace_out) {
    trace << "# barnsim trace v1\n";
    trace << "env_seed=" << env.seed << "\n";
    trace << "env_id=" << env_id << "\n";
    trace << "trial_seed=" << trial_seed << "\n";
    std::istringstream cfg(config_to_text(config));
    std::string line;
    while (std::getline(cfg, line)) trace << "config." << line << "\n";
    trace << "begin_ticks\n";
  }

  const Footprint physical = make_rectangle_footprint(
      config.footprint_length, config.footprint_width, 0.0);

  Xoshiro256ss rng(trial_seed);
  Pose2 pose = jittered_start(env, config, physical, rng);

  const bool use_fsm = config.profile != Profile::kTube;
  NavFsm fsm(config.fsm);
  TubeDrivePolicy policy(&library);
  Costmap costmap(env.grid.width, env.grid.height, env.grid.resolution,
                  env.grid.origin, config.sim.inflation_radius, true,
                  config.sim.inscribed_radius);

  std::optional<PlannedPath> path;
  Scalar last_plan_time = -1e9;
  Scalar time = 0.0;
  bool done = false;

  auto finish = [&](Outcome outcome, Scalar at, const std::string& note) {
    record.outcome = outcome;
    record.actual_time = at;
    record.note = note;
    done = true;
  };

  if (footprint_collides(env.grid, pose, physical)) {
    finish(Outcome::kCollision, 0.0, "collision at start");
  }

  const int max_ticks =
      static_cast<int>(std::ceil(config.sim.timeout / config.sim.dt));
  for (int tick = 0; !done && tick < max_ticks; ++tick) {
    time = tick * config.sim.dt;

    LaserScan scan = raycast_scan(env.grid, pose, config.beam, time);
    if (config.sim.sensor_noise_sigma > 0.0)
      add_range_noise(scan, config.sim.sensor_noise_sigma, rng);
    costmap.update_from_scan(scan, pose);

    std::string plan_note;
    if (!path || time - last_plan_time >= config.sim.replan_period - 1e-9) {
      path = plan(costmap, pose.position(), env.goal, config.sim.cost_weight);
      last_plan_time = time;
      if (!path) plan_note = "no_path";
    }

    const bool have_path = path.has_value() && !path->waypoints.empty();
    Vec2 subgoal_world = pose.position();
    bool aligned = false;
    Scalar bearing_to_subgoal = pose.theta;
    if (have_path) {
      subgoal_world = subgoal(*path, pose, config.fsm.lookahead);
      const Vec2 d = subgoal_world - pose.position();
      if (d.norm() > 1e-9) bearing_to_subgoal = std::atan2(d.y(), d.x());
      aligned = heading_aligned(pose, *path, config.fsm.heading_tolerance,
                                config.fsm.lookahead);
    }
    const Vec2 subgoal_robot = pose.to_local(subgoal_world);
    const std::optional<Twist> policy_cmd = policy.command(scan, subgoal_robot);

    Twist cmd(0.0, 0.0);
    NavState state = NavState::kDrive;
    NavEvent event = NavEvent::kNone;
    bool forward_safe = true;
    bool rear_safe = true;

    if (use_fsm) {
      bool check_ok;
      if (config.profile == Profile::kTubeFsmFi) {
        check_ok = fi_check(scan, config.fsm.footprint,
                            config.fsm.fi_inflation);
      } else {
        const Twist probe =
            policy_cmd ? *policy_cmd : Twist(config.fsm.forward_speed, 0.0);
        check_ok = mpc_check({pose, probe}, probe, costmap,
                             config.fsm.mpc_steps, config.fsm.mpc_dt,
                             config.fsm.footprint);
      }
      forward_safe = check_ok;
      rear_safe = rear_roi_check(costmap, pose, config.fsm.rear_roi);

      FsmInputs inputs;
      inputs.time = time;
      inputs.pose = pose;
      inputs.have_path = have_path;
      inputs.aligned = aligned;
      inputs.bearing_to_subgoal = bearing_to_subgoal;
      inputs.policy_cmd = policy_cmd;
      inputs.forward_safe = forward_safe;
      inputs.rear_safe = rear_safe;
      inputs.forward_creep_safe = forward_creep_check(scan,
                                                      config.fsm.footprint);
      const Scalar rot_step =
          config.fsm.heading_rate * config.sim.dt * 3.0;
      inputs.rotate_ccw_safe =
          rotation_step_safe(scan, config.fsm.footprint, rot_step);
      inputs.rotate_cw_safe =
          rotation_step_safe(scan, config.fsm.footprint, -rot_step);
      const FsmStepResult result = fsm.step(inputs);
      cmd = result.cmd;
      state = result.state;
      event = result.event;
      if (!result.diagnostic.empty() && record.note.empty())
        record.note = result.diagnostic;
    } else {
      // Bare tube profile: drive on the policy, stop when it reports unsafe.
      cmd = policy_cmd.value_or(Twist(0.0, 0.0));
      state = NavState::kDrive;
      event = policy_cmd ? NavEvent::kSafe : NavEvent::kDangerous;
    }

    bool clamped = false;
    cmd = platform_clamp(cmd, config.sim, clamped);

    if (trace_out) {
      trace << "tick=" << tick << " t=" << fmt_f(time) << " x="
            << fmt_f(pose.x) << " y=" << fmt_f(pose.y) << " th="
            << fmt_f(pose.theta) << " state=" << to_string(state)
            << " event=" << to_string(event) << " v=" << fmt_f(cmd.v)
            << " w=" << fmt_f(cmd.omega) << " fwd=" << (forward_safe ? 1 : 0)
            << " rear=" << (rear_safe ? 1 : 0)
            << " clamp=" << (clamped ? 1 : 0);
      if (!plan_note.empty()) trace << " plan=" << plan_note;
      if (config.emit_scan_ranges) {
        trace << " ranges=";
        for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
          if (i) trace << ";";
          trace << fmt_f(scan.ranges[i]);
        }
      }
      trace << "\n";
    }

    pose = integrate_unicycle(pose, cmd, config.sim.dt);
    const Scalar t_end = (tick + 1) * config.sim.dt;

    if (footprint_collides(env.grid, pose, physical)) {
      finish(Outcome::kCollision, t_end, "");
    } else if ((pose.position() - env.goal).norm() <=
               config.sim.goal_tolerance) {
      finish(Outcome::kSuccess, t_end, "");
    }
  }
  if (!done) finish(Outcome::kTimeout, config.sim.timeout, "");

  record.score = score_trial(record.outcome, record.actual_time,
                             record.optimal_time, config.score);
  if (trace_out) {
    trace << "end outcome=" << to_string(record.outcome) << " at="
          << fmt_f(record.actual_time) << " ot=" << fmt_f(record.optimal_time)
          << " score=" << fmt_f(record.score) << "\n";
    *trace_out = trace.str();
  }
  return record;
}

std::string replay_trace(const std::string& trace_text) {
  std::istringstream in(trace_text);
  std::string line;
  if (!std::getline(in, line) || line != "# barnsim trace v1")
    return "not a barnsim trace";
  std::uint64_t env_seed = 0, trial_seed = 0;
  int env_id = 0;
  std::string config_text;
  while (std::getline(in, line) && line != "begin_ticks") {
    const auto eq = line.find('=');
    if (eq == std::string::npos) return "malformed header line: " + line;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "env_seed") env_seed = std::stoull(value);
    else if (key == "env_id") env_id = std::stoi(value);
    else if (key == "trial_seed") trial_seed = std::stoull(value);
    else if (key.rfind("config.", 0) == 0)
      config_text += line.substr(7) + "\n";
    else return "unknown header key: " + key;
  }

  const SuiteConfig config = config_from_text(config_text);
  const EnvSpec env = generate_environment(env_seed, config.ca);
  const TubeLibrary library = build_tube_library(config.tubes, config.beam);
  std::string fresh;
  run_trial(env, config, library, env_id, trial_seed, &fresh);

  // Compare tick sections line by line.
  std::istringstream a(trace_text);
  std::istringstream b(fresh);
  std::string la, lb;
  bool in_ticks = false;
  int line_no = 0;
  for (;;) {
    const bool more_a = static_cast<bool>(std::getline(a, la));
    const bool more_b = static_cast<bool>(std::getline(b, lb));
    ++line_no;
    if (!more_a && !more_b) return "";
    if (!more_a || !more_b) return "trace lengths differ";
    if (!in_ticks) {
      if ((la == "begin_ticks") != (lb == "begin_ticks"))
        return "headers differ in length";
      in_ticks = la == "begin_ticks";
      continue;
    }
    if (la != lb)
      return "divergence at line " + std::to_string(line_no) + ": '" + la +
             "' vs '" + lb + "'";
  }
}

}  // namespace barnsim
