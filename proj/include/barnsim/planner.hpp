#ifndef BARNSIM_PLANNER_HPP
#define BARNSIM_PLANNER_HPP

#include <optional>
#include <vector>

#include "barnsim/costmap.hpp"
#include "barnsim/geometry.hpp"

namespace barnsim {

struct PlannedPath {
  std::vector<Vec2> waypoints;  // cell centers, consecutive cells 8-adjacent
  Scalar total_length = 0.0;    // meters, diagonal steps cost sqrt(2)*res
};

// Minimal-cost 8-connected grid path on the costmap. Step cost is
// step_length * (1 + cost_weight * cell_cost / 253) using the destination
// cell's cost; lethal and inscribed cells are impassable (inscribed cells
// within 0.3 m of an endpoint stay passable so the robot can plan out of a
// tight spot). Ties break lexicographically on (cost, row, column) so
// results are identical across platforms. Returns nullopt when the goal is
// unreachable or an endpoint is lethal.
std::optional<PlannedPath> plan(const Costmap& costmap, const Vec2& start,
                                const Vec2& goal, Scalar cost_weight = 0.5);

// Shortest 8-connected path length between the cells containing start and
// goal on a plain occupancy grid, in meters. Nullopt when no path exists or
// an endpoint cell is occupied.
std::optional<Scalar> grid_path_length(const OccupancyGrid& grid,
                                       const Vec2& start, const Vec2& goal);

// Point on the path `lookahead` meters beyond the robot's arc-length
// projection onto it; the final waypoint when less than `lookahead` remains.
// Projection ties resolve to the earliest arc length.
Vec2 subgoal(const PlannedPath& path, const Pose2& robot_pose,
             Scalar lookahead);

}  // namespace barnsim

#endif
