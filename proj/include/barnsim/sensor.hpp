#ifndef BARNSIM_SENSOR_HPP
#define BARNSIM_SENSOR_HPP

#include <vector>

#include "barnsim/geometry.hpp"
#include "barnsim/grid.hpp"
#include "barnsim/rng.hpp"

namespace barnsim {

// Planar LiDAR with a 270 degree field of view by default. Beam i points at
// angle_min() + i * angle_increment() in the sensor frame.
struct BeamConfig {
  Scalar fov = 1.5 * M_PI;
  int beam_count = 720;
  Scalar max_range = 10.0;
  Pose2 mount_offset;  // sensor pose in the robot frame

  Scalar angle_min() const { return -0.5 * fov; }
  Scalar angle_increment() const { return fov / (beam_count - 1); }
  Scalar beam_angle(int i) const { return angle_min() + i * angle_increment(); }

  bool operator==(const BeamConfig& other) const {
    return fov == other.fov && beam_count == other.beam_count &&
           max_range == other.max_range &&
           mount_offset.x == other.mount_offset.x &&
           mount_offset.y == other.mount_offset.y &&
           mount_offset.theta == other.mount_offset.theta;
  }
};

struct LaserScan {
  std::vector<Scalar> ranges;  // meters; max_range means no return
  BeamConfig config;
  Scalar stamp = 0.0;  // simulation time, seconds
};

// Casts every beam against the grid with exact cell stepping (no skipped
// cells). Range is measured to the entry face of the first occupied cell
// and clamped to max_range. A sensor origin inside an occupied cell yields
// all-zero ranges.
LaserScan raycast_scan(const OccupancyGrid& grid, const Pose2& robot_pose,
                       const BeamConfig& config, Scalar stamp = 0.0);

// Single-ray version (bearing in world frame). Used by raycast_scan.
Scalar raycast(const OccupancyGrid& grid, const Vec2& origin, Scalar bearing,
               Scalar max_range);

// Optional additive Gaussian range noise for robustness experiments.
// Noisy ranges stay clamped to (0, max_range].
void add_range_noise(LaserScan& scan, Scalar sigma, Xoshiro256ss& rng);

// World position of the sensor for a given robot pose.
Pose2 sensor_pose(const Pose2& robot_pose, const BeamConfig& config);

// World positions of actual returns (range < max_range).
std::vector<Vec2> scan_endpoints_world(const LaserScan& scan,
                                       const Pose2& robot_pose);

// Return points expressed in the robot frame.
std::vector<Vec2> scan_endpoints_robot(const LaserScan& scan);

}  // namespace barnsim

#endif
