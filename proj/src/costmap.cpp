#include "barnsim/costmap.hpp"

#include <algorithm>
#include <cmath>

#include "barnsim/sensor.hpp"

namespace barnsim {

Costmap::Costmap(int width, int height, Scalar resolution, const Vec2& origin,
                 Scalar inflation_radius, bool memory, Scalar inscribed_radius)
    : obstacles_(width, height, resolution, origin),
      cost_(static_cast<std::size_t>(width) * height, 0),
      inflation_radius_(inflation_radius),
      inscribed_radius_(inscribed_radius),
      memory_(memory) {
  build_kernel();
}

void Costmap::build_kernel() {
  kernel_.clear();
  const Scalar res = obstacles_.resolution;
  const Scalar reach = std::max(inflation_radius_, inscribed_radius_);
  const int r = static_cast<int>(std::ceil(reach / res));
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const Scalar d = std::hypot(dx * res, dy * res);
      if (d < inscribed_radius_) {
        kernel_.emplace_back(dx, dy, kInscribedCost);
        continue;
      }
      if (d >= inflation_radius_) continue;
      const Scalar span = inflation_radius_ - inscribed_radius_;
      const Scalar frac =
          span > 0.0 ? (d - inscribed_radius_) / span : 1.0;
      const long rounded = std::lround(kMaxInflatedCost * (1.0 - frac));
      // Clamp to >= 1 so cost is positive exactly inside the radius.
      const std::uint8_t c =
          static_cast<std::uint8_t>(std::max<long>(1, rounded));
      kernel_.emplace_back(dx, dy, c);
    }
  }
}

void Costmap::add_obstacle(int ix, int iy) {
  if (!obstacles_.in_bounds(ix, iy) || obstacles_.occupied(ix, iy)) return;
  obstacles_.set(ix, iy, true);
  cost_[obstacles_.index(ix, iy)] = kLethalCost;
  for (const auto& [dx, dy, c] : kernel_) {
    const int nx = ix + dx;
    const int ny = iy + dy;
    if (!obstacles_.in_bounds(nx, ny)) continue;
    std::uint8_t& cell = cost_[obstacles_.index(nx, ny)];
    if (cell != kLethalCost && cell < c) cell = c;
  }
}

void Costmap::update_from_scan(const LaserScan& scan, const Pose2& robot_pose) {
  if (!memory_) clear();
  const Pose2 sensor = sensor_pose(robot_pose, scan.config);
  const Vec2 origin = sensor.position();
  // The range is measured to the occupied cell's entry face; an epsilon
  // step across the face lands in that cell without ever spilling into a
  // lateral neighbor the way a half-cell step would on oblique hits.
  const Scalar nudge = 1e-6;
  for (int i = 0; i < scan.config.beam_count; ++i) {
    const Scalar r = scan.ranges[i];
    if (r <= 0.0 || r >= scan.config.max_range) continue;
    const Scalar bearing = sensor.theta + scan.config.beam_angle(i);
    const Vec2 dir(std::cos(bearing), std::sin(bearing));
    const Vec2 p = origin + (r + nudge) * dir;
    int ix, iy;
    obstacles_.world_to_cell(p, ix, iy);
    add_obstacle(ix, iy);
  }
}

void Costmap::clear() {
  std::fill(obstacles_.cells.begin(), obstacles_.cells.end(), 0);
  std::fill(cost_.begin(), cost_.end(), 0);
}

Costmap inflate(const OccupancyGrid& grid, Scalar inflation_radius,
                bool memory) {
  Costmap costmap(grid.width, grid.height, grid.resolution, grid.origin,
                  inflation_radius, memory);
  for (int iy = 0; iy < grid.height; ++iy) {
    for (int ix = 0; ix < grid.width; ++ix) {
      if (grid.occupied(ix, iy)) costmap.add_obstacle(ix, iy);
    }
  }
  return costmap;
}

}  // namespace barnsim
