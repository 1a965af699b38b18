#include "barnsim/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace barnsim {

Pose2 sensor_pose(const Pose2& robot_pose, const BeamConfig& config) {
  return robot_pose.compose(config.mount_offset);
}

Scalar raycast(const OccupancyGrid& grid, const Vec2& origin, Scalar bearing,
               Scalar max_range) {
  // Amanatides-Woo traversal: visits every cell the ray passes through.
  const Vec2 dir(std::cos(bearing), std::sin(bearing));
  int ix, iy;
  grid.world_to_cell(origin, ix, iy);
  if (grid.occupied_or_oob(ix, iy)) {
    // Inside an obstacle (or outside the map): nothing meaningful to see.
    return grid.in_bounds(ix, iy) ? 0.0 : max_range;
  }

  const Scalar res = grid.resolution;
  const int step_x = dir.x() > 0.0 ? 1 : (dir.x() < 0.0 ? -1 : 0);
  const int step_y = dir.y() > 0.0 ? 1 : (dir.y() < 0.0 ? -1 : 0);

  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  Scalar t_max_x = inf, t_delta_x = inf;
  Scalar t_max_y = inf, t_delta_y = inf;
  if (step_x != 0) {
    const Scalar next_x =
        grid.origin.x() + (ix + (step_x > 0 ? 1 : 0)) * res;
    t_max_x = (next_x - origin.x()) / dir.x();
    t_delta_x = res / std::abs(dir.x());
  }
  if (step_y != 0) {
    const Scalar next_y =
        grid.origin.y() + (iy + (step_y > 0 ? 1 : 0)) * res;
    t_max_y = (next_y - origin.y()) / dir.y();
    t_delta_y = res / std::abs(dir.y());
  }

  for (;;) {
    Scalar t_entry;
    if (t_max_x < t_max_y) {
      t_entry = t_max_x;
      t_max_x += t_delta_x;
      ix += step_x;
    } else {
      t_entry = t_max_y;
      t_max_y += t_delta_y;
      iy += step_y;
    }
    if (t_entry >= max_range) return max_range;
    if (!grid.in_bounds(ix, iy)) return max_range;  // left the map: no return
    if (grid.occupied(ix, iy)) return t_entry;      // entry-face convention
  }
}

LaserScan raycast_scan(const OccupancyGrid& grid, const Pose2& robot_pose,
                       const BeamConfig& config, Scalar stamp) {
  LaserScan scan;
  scan.config = config;
  scan.stamp = stamp;
  scan.ranges.resize(config.beam_count);

  const Pose2 sensor = sensor_pose(robot_pose, config);
  const Vec2 origin = sensor.position();
  int ix, iy;
  grid.world_to_cell(origin, ix, iy);
  if (!grid.in_bounds(ix, iy) || grid.occupied(ix, iy)) {
    std::fill(scan.ranges.begin(), scan.ranges.end(), 0.0);
    return scan;
  }
  for (int i = 0; i < config.beam_count; ++i) {
    const Scalar bearing = sensor.theta + config.beam_angle(i);
    scan.ranges[i] = raycast(grid, origin, bearing, config.max_range);
  }
  return scan;
}

void add_range_noise(LaserScan& scan, Scalar sigma, Xoshiro256ss& rng) {
  if (sigma <= 0.0) return;
  const Scalar max_range = scan.config.max_range;
  for (Scalar& r : scan.ranges) {
    if (r >= max_range) continue;  // no return stays no return
    r = std::clamp(r + rng.gaussian(0.0, sigma), 1e-6, max_range);
  }
}

std::vector<Vec2> scan_endpoints_robot(const LaserScan& scan) {
  std::vector<Vec2> points;
  points.reserve(scan.ranges.size());
  const BeamConfig& cfg = scan.config;
  for (int i = 0; i < cfg.beam_count; ++i) {
    const Scalar r = scan.ranges[i];
    if (r >= cfg.max_range) continue;
    const Scalar angle = cfg.beam_angle(i);
    points.push_back(cfg.mount_offset.transform(
        Vec2(r * std::cos(angle), r * std::sin(angle))));
  }
  return points;
}

std::vector<Vec2> scan_endpoints_world(const LaserScan& scan,
                                       const Pose2& robot_pose) {
  std::vector<Vec2> points = scan_endpoints_robot(scan);
  for (Vec2& p : points) p = robot_pose.transform(p);
  return points;
}

}  // namespace barnsim
