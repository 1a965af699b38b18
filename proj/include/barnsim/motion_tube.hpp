#ifndef BARNSIM_MOTION_TUBE_HPP
#define BARNSIM_MOTION_TUBE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "barnsim/geometry.hpp"
#include "barnsim/sensor.hpp"

namespace barnsim {

enum class WeightProfile { kInverseCost, kSoftmax };

// Tube library parameters. The library holds
// velocity_level_count * curvatures_per_level tubes; each velocity level
// spans curvatures uniformly in [-k, k] with
// k = min(curvature_max, max_heading_change / (v * horizon)).
// Capping the heading change keeps every tube's swept volume star-shaped
// from the sensor, so sensor-space availability matches Cartesian
// clearance instead of over-rejecting tubes whose far side the beams
// cannot see past an occluder.
struct TubeParams {
  int velocity_level_count = 5;
  Scalar velocity_min = 0.3;  // m/s
  Scalar velocity_max = 2.0;  // m/s
  int curvatures_per_level = 400;
  Scalar curvature_max = 2.5;       // 1/m
  Scalar max_heading_change = 2.2;  // rad over the horizon
  Scalar horizon = 1.0;             // seconds (T)
  Scalar d_sample = 0.02;           // meters
  Footprint footprint = make_rectangle_footprint(0.508, 0.430, 0.04);
  WeightProfile weight_profile = WeightProfile::kInverseCost;
  Scalar weight_epsilon = 0.05;        // meters, inverse-cost profile
  Scalar softmax_temperature = 0.25;   // meters, softmax profile

  int tube_count() const { return velocity_level_count * curvatures_per_level; }
  std::vector<Scalar> velocity_levels() const;
  Scalar curvature_limit(Scalar v) const;
};

// One candidate maneuver: constant (v, kappa) over the horizon, plus the
// precomputed inflated swept-volume outline and its sensor-space
// projection.
struct MotionTube {
  Scalar v = 0.0;
  Scalar kappa = 0.0;
  Pose2 endpoint;
  // Ordered closed outline of the inflated swept volume, robot frame,
  // consecutive samples <= d_sample apart.
  std::vector<Vec2> boundary_samples;
  // (beam index, distance from sensor origin) for every in-FOV sample.
  std::vector<std::pair<std::int32_t, Scalar>> beam_projection;
  std::int32_t out_of_fov_count = 0;
  // Tubes with more than half their samples outside the FOV cannot be
  // verified from the scan and are never reported available.
  bool blind = false;
};

class TubeLibrary {
 public:
  TubeLibrary() = default;
  TubeLibrary(std::vector<MotionTube> tubes, TubeParams params,
              BeamConfig beam_config);

  const std::vector<MotionTube>& tubes() const { return tubes_; }
  const TubeParams& params() const { return params_; }
  const BeamConfig& beam_config() const { return beam_config_; }
  int size() const { return static_cast<int>(tubes_.size()); }

  // Pure sensor-space test: true iff every projected sample's beam reads
  // strictly farther than the sample. Blind tubes are never available.
  bool tube_available(int tube_index, const LaserScan& scan) const;

  // Availability of the whole library in tube-index order.
  void availability(const LaserScan& scan, std::vector<std::uint8_t>& out) const;

  bool operator==(const TubeLibrary& other) const;

 private:
  std::vector<MotionTube> tubes_;
  TubeParams params_;
  BeamConfig beam_config_;
  // Flattened projections for the per-tick hot loop.
  std::vector<std::int32_t> flat_beams_;
  std::vector<Scalar> flat_dists_;
  std::vector<std::pair<std::size_t, std::size_t>> spans_;  // offset, count
  void build_flat();
};

// Precomputes the tube library for the given parameters and sensor.
TubeLibrary build_tube_library(const TubeParams& params,
                               const BeamConfig& beam_config);

// Euclidean distance from the tube endpoint to the sub-goal (robot frame).
Scalar tube_cost(const MotionTube& tube, const Vec2& subgoal_robot);

// Weighted average command over the available tubes; nullopt when no tube
// is available (the caller treats this as the "dangerous" event). The
// reduction runs in tube-index order, so the result does not depend on any
// evaluation schedule.
std::optional<Twist> select_command(const TubeLibrary& library,
                                    const LaserScan& scan,
                                    const Vec2& subgoal_robot);

// Versioned little-endian binary dump of a library; round-trips exactly.
void save_tube_library(const TubeLibrary& library, const std::string& path);
TubeLibrary load_tube_library(const std::string& path);

}  // namespace barnsim

#endif
