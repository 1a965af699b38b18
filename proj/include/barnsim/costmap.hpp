#ifndef BARNSIM_COSTMAP_HPP
#define BARNSIM_COSTMAP_HPP

#include <cstdint>
#include <vector>

#include "barnsim/grid.hpp"

namespace barnsim {

struct LaserScan;
struct Pose2;

// Cost value marking an occupied cell. Cells whose center lies within the
// inscribed radius of an obstacle get kInscribedCost (the robot center
// physically cannot be there); beyond that, costs decay linearly from
// kMaxInflatedCost at the inscribed boundary to 0 at the inflation radius.
inline constexpr std::uint8_t kLethalCost = 255;
inline constexpr std::uint8_t kInscribedCost = 254;
inline constexpr std::uint8_t kMaxInflatedCost = 253;

// Inflated obstacle cost field over a grid. Lethal exactly on occupied
// cells (distances are hypot of integer cell offsets times resolution);
// inscribed within inscribed_radius; elsewhere the cost decays
// linearly from 253 at the inscribed boundary to 0 at the inflation radius
// (d is the center-to-center distance to the nearest occupied cell, and
// cost is clamped to >= 1 strictly inside the radius). With `memory`
// enabled (the default), obstacle cells persist once added, which is what
// the rear-RoI safety check relies on.
class Costmap {
 public:
  Costmap() = default;
  Costmap(int width, int height, Scalar resolution, const Vec2& origin,
          Scalar inflation_radius, bool memory = true,
          Scalar inscribed_radius = 0.0);

  int width() const { return obstacles_.width; }
  int height() const { return obstacles_.height; }
  Scalar resolution() const { return obstacles_.resolution; }
  const Vec2& origin() const { return obstacles_.origin; }
  Scalar inflation_radius() const { return inflation_radius_; }
  Scalar inscribed_radius() const { return inscribed_radius_; }
  bool memory() const { return memory_; }

  bool in_bounds(int ix, int iy) const { return obstacles_.in_bounds(ix, iy); }
  std::uint8_t cost(int ix, int iy) const {
    return cost_[obstacles_.index(ix, iy)];
  }
  bool lethal(int ix, int iy) const { return cost(ix, iy) == kLethalCost; }

  // Boolean view of the lethal layer, usable with footprint_collides.
  const OccupancyGrid& lethal_grid() const { return obstacles_; }

  // Marks one obstacle cell and stamps its inflation kernel (cost keeps the
  // max over all stamps, so incremental updates are exact).
  void add_obstacle(int ix, int iy);

  // Marks the cell of every scan return (range < max_range). Endpoints are
  // nudged half a cell along the beam so the face-hit convention lands in
  // the occupied cell. Without memory the previous contents are cleared.
  void update_from_scan(const LaserScan& scan, const Pose2& robot_pose);

  void clear();

  Vec2 cell_center(int ix, int iy) const {
    return obstacles_.cell_center(ix, iy);
  }
  void world_to_cell(const Vec2& p, int& ix, int& iy) const {
    obstacles_.world_to_cell(p, ix, iy);
  }

 private:
  OccupancyGrid obstacles_;
  std::vector<std::uint8_t> cost_;
  Scalar inflation_radius_ = 0.25;
  Scalar inscribed_radius_ = 0.0;
  bool memory_ = true;
  // (dx, dy, cost) stamp offsets within the inflation radius.
  std::vector<std::tuple<int, int, std::uint8_t>> kernel_;
  void build_kernel();
};

// Builds a costmap from a ground-truth grid: every occupied cell becomes
// lethal and is inflated with the linear decay profile.
Costmap inflate(const OccupancyGrid& grid, Scalar inflation_radius,
                bool memory = true);

}  // namespace barnsim

#endif
