#include "barnsim/fsm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace barnsim {

const char* to_string(NavState s) {
  switch (s) {
    case NavState::kInitial: return "Initial";
    case NavState::kHeading: return "Heading";
    case NavState::kDrive: return "Drive";
    case NavState::kForward: return "Forward";
    case NavState::kBacktrack: return "Backtrack";
  }
  return "?";
}

const char* to_string(NavEvent e) {
  switch (e) {
    case NavEvent::kNone: return "none";
    case NavEvent::kNoPath: return "no_path";
    case NavEvent::kPath: return "path";
    case NavEvent::kAligned: return "aligned";
    case NavEvent::kNotAligned: return "not_aligned";
    case NavEvent::kSafe: return "safe";
    case NavEvent::kDangerous: return "dangerous";
    case NavEvent::kStuck: return "stuck";
    case NavEvent::kRecovered: return "recovered";
  }
  return "?";
}

std::optional<NavState> fsm_transition(NavState state, NavEvent event) {
  switch (state) {
    case NavState::kInitial:
      if (event == NavEvent::kNoPath) return NavState::kInitial;
      if (event == NavEvent::kPath) return NavState::kHeading;
      break;
    case NavState::kHeading:
      if (event == NavEvent::kNoPath) return NavState::kInitial;
      if (event == NavEvent::kAligned) return NavState::kDrive;
      break;
    case NavState::kDrive:
      if (event == NavEvent::kSafe) return NavState::kDrive;
      if (event == NavEvent::kNotAligned) return NavState::kHeading;
      if (event == NavEvent::kDangerous) return NavState::kBacktrack;
      break;
    case NavState::kBacktrack:
      if (event == NavEvent::kSafe) return NavState::kBacktrack;
      if (event == NavEvent::kStuck) return NavState::kForward;
      if (event == NavEvent::kRecovered) return NavState::kHeading;
      break;
    case NavState::kForward:
      if (event == NavEvent::kSafe) return NavState::kForward;
      if (event == NavEvent::kRecovered) return NavState::kHeading;
      if (event == NavEvent::kStuck) return NavState::kBacktrack;
      break;
  }
  return std::nullopt;
}

Polygon RearRoI::polygon() const {
  const Scalar x0 = -(rear_offset + depth);
  const Scalar x1 = -rear_offset;
  const Scalar hy = 0.5 * width;
  return {Vec2(x1, -hy), Vec2(x1, hy), Vec2(x0, hy), Vec2(x0, -hy)};
}

void RecordedPath::append(Scalar time, const Pose2& pose) {
  if (!poses.empty()) {
    const auto& [t, last] = poses.back();
    if (time <= t) return;  // timestamps must strictly increase
    if ((pose.position() - last.position()).norm() < 1e-4 &&
        std::abs(angle_diff(pose.theta, last.theta)) < 1e-4)
      return;
  }
  poses.emplace_back(time, pose);
  // Trim to the retained arc length.
  Scalar length = 0.0;
  for (std::size_t i = poses.size(); i-- > 1;) {
    length += (poses[i].second.position() - poses[i - 1].second.position())
                  .norm();
    if (length > max_length) {
      poses.erase(poses.begin(), poses.begin() + static_cast<long>(i));
      break;
    }
  }
}

bool heading_aligned(const Pose2& pose, const PlannedPath& path,
                     Scalar tolerance, Scalar lookahead) {
  if (path.waypoints.empty())
    throw std::invalid_argument("heading_aligned: empty path");
  const Vec2 target = subgoal(path, pose, lookahead);
  const Vec2 d = target - pose.position();
  if (d.norm() < 1e-9) return true;  // standing on the sub-goal
  const Scalar bearing = std::atan2(d.y(), d.x());
  return std::abs(angle_diff(bearing, pose.theta)) <= tolerance;
}

bool fi_check(const LaserScan& scan, const Footprint& footprint,
              Scalar inflation) {
  if (inflation < 0.0) throw std::invalid_argument("fi_check: inflation < 0");
  // Exact disc inflation: a point violates iff it lies in the polygon or
  // within `inflation` of its boundary (mitering a polygon instead would
  // over-cover the corners and latch "unsafe" with clearance to spare).
  for (const Vec2& p : scan_endpoints_robot(scan)) {
    if (polygon_contains(footprint.polygon, p)) return false;
    if (inflation > 0.0 &&
        polygon_boundary_distance(footprint.polygon, p) <= inflation)
      return false;
  }
  return true;
}

bool mpc_check(const RobotState& state, const Twist& cmd,
               const Costmap& costmap, int n_steps, Scalar dt,
               const Footprint& footprint) {
  if (n_steps < 1) throw std::invalid_argument("mpc_check: n_steps < 1");
  if (dt <= 0.0) throw std::invalid_argument("mpc_check: dt <= 0");
  Pose2 pose = state.pose;
  for (int i = 0; i < n_steps; ++i) {
    pose = integrate_unicycle(pose, cmd, dt);
    if (footprint_collides(costmap.lethal_grid(), pose, footprint))
      return false;
  }
  return true;
}

bool rear_roi_check(const Costmap& costmap, const Pose2& pose,
                    const RearRoI& roi) {
  if (!costmap.memory())
    throw std::invalid_argument(
        "rear_roi_check: costmap without obstacle memory");
  const Polygon box = transform_polygon(roi.polygon(), pose);
  const std::vector<Vec2> normals = polygon_edge_normals(box);
  Vec2 lo = box[0], hi = box[0];
  for (const Vec2& v : box) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  int ix0, iy0, ix1, iy1;
  costmap.world_to_cell(lo, ix0, iy0);
  costmap.world_to_cell(hi, ix1, iy1);
  const Scalar res = costmap.resolution();
  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      const bool blocking =
          !costmap.in_bounds(ix, iy) || costmap.lethal(ix, iy);
      if (!blocking) continue;
      const Vec2 cell_min =
          costmap.origin() + Vec2(ix * res, iy * res);
      if (convex_polygon_intersects_aabb(box, normals, cell_min,
                                         cell_min + Vec2(res, res)))
        return false;
    }
  }
  return true;
}

Vec2 backtrack_target(const RecordedPath& recorded, const Pose2& pose,
                      Scalar distance) {
  if (recorded.empty())
    throw std::invalid_argument("backtrack_target: empty recorded path");
  // Recorded pose nearest the robot.
  std::size_t nearest = 0;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 0; i < recorded.poses.size(); ++i) {
    const Scalar d =
        (recorded.poses[i].second.position() - pose.position()).squaredNorm();
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  // Walk back `distance` meters of arc length.
  Scalar remaining = distance;
  for (std::size_t i = nearest; i > 0; --i) {
    const Vec2 a = recorded.poses[i].second.position();
    const Vec2 b = recorded.poses[i - 1].second.position();
    const Scalar seg = (b - a).norm();
    if (seg >= remaining && seg > 0.0) {
      return a + (remaining / seg) * (b - a);
    }
    remaining -= seg;
  }
  return recorded.poses.front().second.position();
}

bool rotation_step_safe(const LaserScan& scan, const Footprint& footprint,
                        Scalar delta, Scalar pad) {
  const Polygon hull = inflate_convex_polygon(footprint.polygon, pad);
  // Only returns near the hull can be swept over; rotating the footprint
  // by +delta is testing points rotated by -delta.
  Scalar reach = 0.0;
  for (const Vec2& v : hull) reach = std::max(reach, v.norm());
  const Rot2 half(-0.5 * delta);
  const Rot2 full(-delta);
  for (const Vec2& p : scan_endpoints_robot(scan)) {
    if (p.norm() > reach) continue;
    if (polygon_contains(hull, half * p) || polygon_contains(hull, full * p))
      return false;
  }
  return true;
}

bool forward_creep_check(const LaserScan& scan, const Footprint& footprint,
                         Scalar advance, Scalar pad) {
  Polygon swept = inflate_convex_polygon(footprint.polygon, pad);
  // Stretch the hull forward by `advance` (convex footprints keep their
  // vertex order under this shift).
  Scalar max_x = 0.0;
  for (const Vec2& v : swept) max_x = std::max(max_x, v.x());
  for (Vec2& v : swept) {
    if (v.x() > max_x - 1e-9) v.x() += advance;
  }
  for (const Vec2& p : scan_endpoints_robot(scan)) {
    if (polygon_contains(swept, p)) return false;
  }
  return true;
}

std::optional<Twist> PurePursuitPolicy::command(const LaserScan&,
                                                const Vec2& subgoal_robot) {
  const Scalar d2 = subgoal_robot.squaredNorm();
  if (d2 < 1e-12) return Twist(0.0, 0.0);
  // Classic pure pursuit curvature toward the sub-goal point.
  const Scalar curvature = 2.0 * subgoal_robot.y() / d2;
  return Twist(cruise_speed_, cruise_speed_ * curvature);
}

NavFsm::NavFsm(FsmConfig config) : config_(std::move(config)) {}

void NavFsm::reset() {
  state_ = NavState::kInitial;
  rotation_commit_ = 0;
  recorded_.clear();
  motion_window_.clear();
  safe_streak_ = 0.0;
  has_last_time_ = false;
}

bool NavFsm::displacement_stuck(const FsmInputs& inputs) const {
  if (motion_window_.empty()) return false;
  const auto& [t0, p0] = motion_window_.front();
  if (inputs.time - t0 < config_.stuck_window) return false;
  return (inputs.pose.position() - p0).norm() < config_.stuck_displacement;
}

NavEvent NavFsm::derive_event(const FsmInputs& inputs) const {
  switch (state_) {
    case NavState::kInitial:
      return inputs.have_path ? NavEvent::kPath : NavEvent::kNoPath;
    case NavState::kHeading:
      if (!inputs.have_path) return NavEvent::kNoPath;
      if (inputs.aligned) return NavEvent::kAligned;
      return NavEvent::kNone;  // still rotating toward the path
    case NavState::kDrive:
      if (!inputs.policy_cmd || !inputs.forward_safe)
        return NavEvent::kDangerous;
      if (!inputs.have_path || !inputs.aligned) return NavEvent::kNotAligned;
      return NavEvent::kSafe;
    case NavState::kBacktrack:
      if (safe_streak_ >= config_.recovered_duration)
        return NavEvent::kRecovered;
      if (!inputs.rear_safe || displacement_stuck(inputs))
        return NavEvent::kStuck;
      return NavEvent::kSafe;
    case NavState::kForward:
      if (safe_streak_ >= config_.recovered_duration)
        return NavEvent::kRecovered;
      if (displacement_stuck(inputs)) return NavEvent::kStuck;
      return NavEvent::kSafe;
  }
  return NavEvent::kNone;
}

Twist NavFsm::gated_rotation(Scalar err, const FsmInputs& inputs) {
  const Scalar omega = std::clamp(config_.heading_gain * err,
                                  -config_.heading_rate, config_.heading_rate);
  // Honor a committed direction while its sweep stays clear.
  if (rotation_commit_ == 1 && inputs.rotate_ccw_safe)
    return Twist(0.0, omega > 0.0 ? omega : config_.heading_rate);
  if (rotation_commit_ == -1 && inputs.rotate_cw_safe)
    return Twist(0.0, omega < 0.0 ? omega : -config_.heading_rate);
  const bool want_ccw = omega >= 0.0;
  const bool preferred_safe =
      want_ccw ? inputs.rotate_ccw_safe : inputs.rotate_cw_safe;
  if (preferred_safe) {
    rotation_commit_ = want_ccw ? 1 : -1;
    return Twist(0.0, omega);
  }
  // Blocked on the short side: commit to the long way if that sweep is
  // clear, otherwise hold still and wait for a replan or a transition.
  const bool other_safe =
      want_ccw ? inputs.rotate_cw_safe : inputs.rotate_ccw_safe;
  if (other_safe) {
    rotation_commit_ = want_ccw ? -1 : 1;
    return Twist(0.0,
                 want_ccw ? -config_.heading_rate : config_.heading_rate);
  }
  rotation_commit_ = 0;
  return Twist(0.0, 0.0);
}

Twist NavFsm::clip(const Twist& cmd) const {
  if (!config_.clip_enabled) return cmd;
  const Scalar limit = config_.velocity_clip;
  if (std::abs(cmd.v) <= limit) return cmd;
  // Scale both components so the commanded curvature is preserved.
  const Scalar scale = limit / std::abs(cmd.v);
  return Twist(cmd.v * scale, cmd.omega * scale);
}

Twist NavFsm::emit(NavState state, const FsmInputs& inputs) {
  switch (state) {
    case NavState::kInitial:
      return Twist(0.0, 0.0);
    case NavState::kHeading: {
      if (!inputs.have_path) return Twist(0.0, 0.0);
      const Scalar err = angle_diff(inputs.bearing_to_subgoal,
                                    inputs.pose.theta);
      return gated_rotation(err, inputs);
    }
    case NavState::kDrive:
      return inputs.policy_cmd ? clip(*inputs.policy_cmd) : Twist(0.0, 0.0);
    case NavState::kBacktrack: {
      const Vec2 d = backtrack_goal_ - inputs.pose.position();
      if (d.norm() < 0.03) return Twist(0.0, 0.0);  // reached the target
      // Reverse toward the target on an arc. Retreating matters more than
      // alignment, so back out immediately and steer while moving;
      // rotating in place first can eat the whole recovery window.
      const Scalar desired =
          normalize_angle(std::atan2(d.y(), d.x()) + M_PI);
      const Scalar err = angle_diff(desired, inputs.pose.theta);
      Scalar omega = std::clamp(config_.heading_gain * err,
                                -config_.heading_rate, config_.heading_rate);
      const bool turn_safe =
          omega >= 0.0 ? inputs.rotate_ccw_safe : inputs.rotate_cw_safe;
      if (!turn_safe) omega = 0.0;  // back out straight instead
      return Twist(-config_.reverse_speed, omega);
    }
    case NavState::kForward:
      if (!inputs.forward_creep_safe) return Twist(0.0, 0.0);
      return Twist(config_.forward_speed, 0.0);
  }
  return Twist(0.0, 0.0);
}

void NavFsm::enter_state(NavState next, const FsmInputs& inputs) {
  if (next == state_) return;
  rotation_commit_ = 0;
  if (next == NavState::kBacktrack || next == NavState::kForward) {
    motion_window_.clear();
    motion_window_.emplace_back(inputs.time, inputs.pose.position());
    safe_streak_ = 0.0;
  }
  if (next == NavState::kBacktrack) {
    backtrack_goal_ =
        recorded_.empty()
            ? inputs.pose.transform(Vec2(-config_.backtrack_distance, 0.0))
            : backtrack_target(recorded_, inputs.pose,
                               config_.backtrack_distance);
  }
  if (next == NavState::kDrive) {
    recorded_.append(inputs.time, inputs.pose);
  }
  state_ = next;
}

FsmStepResult NavFsm::step(const FsmInputs& inputs) {
  FsmStepResult result;
  result.state_before = state_;

  const Scalar dt =
      has_last_time_ ? std::max(0.0, inputs.time - last_time_) : 0.0;
  last_time_ = inputs.time;
  has_last_time_ = true;

  // Recovery bookkeeping.
  if (state_ == NavState::kBacktrack || state_ == NavState::kForward) {
    safe_streak_ = inputs.forward_safe ? safe_streak_ + dt : 0.0;
    motion_window_.emplace_back(inputs.time, inputs.pose.position());
    while (motion_window_.size() > 1 &&
           inputs.time - motion_window_[1].first >= config_.stuck_window) {
      motion_window_.pop_front();
    }
  }
  if (state_ == NavState::kDrive) {
    recorded_.append(inputs.time, inputs.pose);
  }
  // Retreat target reached but the front is still unsafe: sample the next
  // point further back instead of idling until the stuck window fires.
  // When the recorded path is exhausted, retreat straight behind.
  if (state_ == NavState::kBacktrack &&
      safe_streak_ < config_.recovered_duration &&
      (backtrack_goal_ - inputs.pose.position()).norm() < 0.03) {
    if (!recorded_.empty()) {
      backtrack_goal_ = backtrack_target(recorded_, inputs.pose,
                                         config_.backtrack_distance);
    }
    if ((backtrack_goal_ - inputs.pose.position()).norm() < 0.03) {
      backtrack_goal_ =
          inputs.pose.transform(Vec2(-config_.backtrack_distance, 0.0));
    }
  }

  const NavEvent event = derive_event(inputs);
  result.event = event;
  if (event != NavEvent::kNone) {
    const auto next = fsm_transition(state_, event);
    if (next) {
      enter_state(*next, inputs);
    } else {
      // Outside the edge set: keep the state, never silently.
      result.diagnostic = std::string("illegal transition (") +
                          to_string(state_) + ", " + to_string(event) + ")";
    }
  }
  result.state = state_;
  result.cmd = emit(state_, inputs);
  return result;
}

}  // namespace barnsim
