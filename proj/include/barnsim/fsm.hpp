#ifndef BARNSIM_FSM_HPP
#define BARNSIM_FSM_HPP

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "barnsim/costmap.hpp"
#include "barnsim/geometry.hpp"
#include "barnsim/motion_tube.hpp"
#include "barnsim/planner.hpp"
#include "barnsim/sensor.hpp"

namespace barnsim {

struct RobotState {
  Pose2 pose;
  Twist twist;
};

enum class NavState { kInitial, kHeading, kDrive, kForward, kBacktrack };
enum class NavEvent {
  kNone,  // no trigger fired this tick; the state persists silently
  kNoPath,
  kPath,
  kAligned,
  kNotAligned,
  kSafe,
  kDangerous,
  kStuck,
  kRecovered,
};

const char* to_string(NavState s);
const char* to_string(NavEvent e);

// The five-state controller's edge set. Returns the successor state, or
// nullopt for a (state, event) pair outside the edge set.
std::optional<NavState> fsm_transition(NavState state, NavEvent event);

// Rectangular region of interest behind the robot, covering the LiDAR
// blind spot: x in [-(rear_offset + depth), -rear_offset], y in
// [-width/2, width/2] in the robot frame.
struct RearRoI {
  Scalar width = 0.53;        // footprint width + 0.1 m
  Scalar depth = 0.25;        // ~1.2 s of travel at the reverse speed
  Scalar rear_offset = 0.27;  // chosen so the box sits outside the 270 FOV
  Polygon polygon() const;
};

// Drive-phase pose history used to pick backtrack targets.
struct RecordedPath {
  std::deque<std::pair<Scalar, Pose2>> poses;  // (timestamp, pose)
  Scalar max_length = 10.0;                    // retained meters

  void append(Scalar time, const Pose2& pose);
  bool empty() const { return poses.empty(); }
  void clear() { poses.clear(); }
};

struct FsmConfig {
  Scalar heading_tolerance = M_PI / 6.0;  // +/-30 degrees, inclusive
  Scalar lookahead = 0.5;                 // sub-goal distance on the path
  Scalar backtrack_distance = 0.3;        // meters along the recorded path
  Scalar fi_inflation = 0.04;             // footprint inflation check margin
  Scalar velocity_clip = 0.7;             // m/s when the profile is active
  int mpc_steps = 20;
  Scalar mpc_dt = 0.01;  // 20 steps ~ 0.2 s of lookahead
  Scalar stuck_window = 2.0;
  Scalar stuck_displacement = 0.05;
  Scalar recovered_duration = 0.5;
  Scalar reverse_speed = 0.2;
  Scalar forward_speed = 0.2;
  Scalar heading_rate = 1.0;  // rad/s cap while rotating in place
  Scalar heading_gain = 2.0;
  RearRoI rear_roi;
  Footprint footprint = make_rectangle_footprint();
  bool clip_enabled = true;
};

// True iff the robot heading is within `tolerance` (inclusive) of the
// bearing to the lookahead sub-goal.
bool heading_aligned(const Pose2& pose, const PlannedPath& path,
                     Scalar tolerance, Scalar lookahead = 0.5);

// Footprint-inflation forward check: safe iff no scan return lies inside
// the footprint inflated by `inflation`.
bool fi_check(const LaserScan& scan, const Footprint& footprint,
              Scalar inflation);

// Predictive forward check: rolls the kinematic model n_steps under a
// constant command and tests the footprint against lethal costmap cells at
// every predicted pose.
bool mpc_check(const RobotState& state, const Twist& cmd,
               const Costmap& costmap, int n_steps, Scalar dt,
               const Footprint& footprint);

// Safe iff no lethal cell intersects the RoI rectangle at the robot's
// pose. Requires costmap memory; a RoI partly outside the map is unsafe.
bool rear_roi_check(const Costmap& costmap, const Pose2& pose,
                    const RearRoI& roi);

// Point `distance` meters back along the recorded path from the recorded
// pose nearest the robot; the path start when less remains.
Vec2 backtrack_target(const RecordedPath& recorded, const Pose2& pose,
                      Scalar distance = 0.3);

// Per-tick inputs, computed by the harness before stepping the FSM.
struct FsmInputs {
  Scalar time = 0.0;
  Pose2 pose;
  bool have_path = false;
  bool aligned = false;
  Scalar bearing_to_subgoal = 0.0;  // world frame; valid when have_path
  std::optional<Twist> policy_cmd;  // nullopt = policy reports unsafe
  bool forward_safe = true;         // configured fi/mpc check outcome
  bool rear_safe = true;            // rear RoI outcome
  bool forward_creep_safe = true;   // near-contact gate for slow forward
  bool rotate_ccw_safe = true;      // in-place rotation sweeps stay clear
  bool rotate_cw_safe = true;
};

// True iff rotating in place by `delta` (signed) keeps every scan return
// outside the footprint inflated by `pad`; checked at the half and full
// step. Used to gate the Heading/Backtrack alignment rotations.
bool rotation_step_safe(const LaserScan& scan, const Footprint& footprint,
                        Scalar delta, Scalar pad = 0.01);

// Directional near-contact gate for the slow-forward recovery: no scan
// return inside the hull swept `advance` meters straight ahead (+ pad).
bool forward_creep_check(const LaserScan& scan, const Footprint& footprint,
                         Scalar advance = 0.05, Scalar pad = 0.005);

struct FsmStepResult {
  NavState state_before = NavState::kInitial;
  NavEvent event = NavEvent::kNone;
  NavState state = NavState::kInitial;
  Twist cmd;
  std::string diagnostic;  // set for (state, event) pairs outside the edge set
};

// Sequential five-state controller. One step per tick; not reentrant.
class NavFsm {
 public:
  explicit NavFsm(FsmConfig config = {});

  FsmStepResult step(const FsmInputs& inputs);

  NavState state() const { return state_; }
  const RecordedPath& recorded_path() const { return recorded_; }
  const Vec2& backtrack_goal() const { return backtrack_goal_; }
  const FsmConfig& config() const { return config_; }
  void reset();

 private:
  NavEvent derive_event(const FsmInputs& inputs) const;
  Twist emit(NavState state, const FsmInputs& inputs);
  Twist gated_rotation(Scalar err, const FsmInputs& inputs);
  void enter_state(NavState next, const FsmInputs& inputs);
  bool displacement_stuck(const FsmInputs& inputs) const;
  Twist clip(const Twist& cmd) const;

  FsmConfig config_;
  NavState state_ = NavState::kInitial;
  RecordedPath recorded_;
  Vec2 backtrack_goal_ = Vec2::Zero();
  std::deque<std::pair<Scalar, Vec2>> motion_window_;
  Scalar safe_streak_ = 0.0;
  Scalar last_time_ = 0.0;
  bool has_last_time_ = false;
  // Committed in-place rotation direction (+1 ccw / -1 cw / 0 free);
  // keeps a blocked-side detour from flip-flopping at the gate boundary.
  int rotation_commit_ = 0;
};

// Local drive policy the FSM wraps in the Drive state.
class DrivePolicy {
 public:
  virtual ~DrivePolicy() = default;
  // Sub-goal expressed in the robot frame; nullopt = no safe command.
  virtual std::optional<Twist> command(const LaserScan& scan,
                                       const Vec2& subgoal_robot) = 0;
};

class TubeDrivePolicy : public DrivePolicy {
 public:
  explicit TubeDrivePolicy(const TubeLibrary* library) : library_(library) {}
  std::optional<Twist> command(const LaserScan& scan,
                               const Vec2& subgoal_robot) override {
    return select_command(*library_, scan, subgoal_robot);
  }

 private:
  const TubeLibrary* library_;
};

// Minimal policy for exercising the FSM without the tube planner: curvature
// toward the sub-goal at a fixed cruise speed, no safety of its own.
class PurePursuitPolicy : public DrivePolicy {
 public:
  explicit PurePursuitPolicy(Scalar cruise_speed = 0.5)
      : cruise_speed_(cruise_speed) {}
  std::optional<Twist> command(const LaserScan& scan,
                               const Vec2& subgoal_robot) override;

 private:
  Scalar cruise_speed_;
};

}  // namespace barnsim

#endif
