#include "barnsim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace barnsim {

namespace {

struct QueueEntry {
  Scalar g;
  int iy;
  int ix;
  bool operator>(const QueueEntry& o) const {
    if (g != o.g) return g > o.g;
    if (iy != o.iy) return iy > o.iy;
    return ix > o.ix;
  }
};

constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

}  // namespace

std::optional<PlannedPath> plan(const Costmap& costmap, const Vec2& start,
                                const Vec2& goal, Scalar cost_weight) {
  int sx, sy, gx, gy;
  costmap.world_to_cell(start, sx, sy);
  costmap.world_to_cell(goal, gx, gy);
  if (!costmap.in_bounds(sx, sy) || !costmap.in_bounds(gx, gy)) return {};
  if (costmap.lethal(sx, sy) || costmap.lethal(gx, gy)) return {};

  const int w = costmap.width();
  const int h = costmap.height();
  const Scalar res = costmap.resolution();
  // Inscribed cells are impassable except near the endpoints: the robot
  // may plan its way out of (or into) a tight spot it already occupies,
  // but never through one.
  const Scalar escape = 0.30;
  auto passable = [&](int ix, int iy) {
    const std::uint8_t cell_cost = costmap.cost(ix, iy);
    if (cell_cost < kInscribedCost) return true;
    if (cell_cost == kLethalCost) return false;
    const Vec2 center = costmap.cell_center(ix, iy);
    return (center - start).norm() <= escape ||
           (center - goal).norm() <= escape;
  };
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> g(static_cast<std::size_t>(w) * h, inf);
  std::vector<int> parent(static_cast<std::size_t>(w) * h, -1);
  auto idx = [w](int ix, int iy) {
    return static_cast<std::size_t>(iy) * w + ix;
  };

  std::priority_queue<QueueEntry, std::vector<QueueEntry>,
                      std::greater<QueueEntry>>
      open;
  g[idx(sx, sy)] = 0.0;
  open.push({0.0, sy, sx});

  const Scalar diag = std::sqrt(2.0) * res;
  while (!open.empty()) {
    const QueueEntry top = open.top();
    open.pop();
    if (top.g > g[idx(top.ix, top.iy)]) continue;  // stale entry
    if (top.ix == gx && top.iy == gy) break;
    for (int k = 0; k < 8; ++k) {
      const int nx = top.ix + kDx[k];
      const int ny = top.iy + kDy[k];
      if (!costmap.in_bounds(nx, ny) || !passable(nx, ny)) continue;
      const Scalar step = (k < 4) ? res : diag;
      const Scalar step_cost =
          step * (1.0 + cost_weight * costmap.cost(nx, ny) /
                            static_cast<Scalar>(kMaxInflatedCost));
      const Scalar cand = top.g + step_cost;
      if (cand < g[idx(nx, ny)]) {
        g[idx(nx, ny)] = cand;
        parent[idx(nx, ny)] = static_cast<int>(idx(top.ix, top.iy));
        open.push({cand, ny, nx});
      }
    }
  }
  if (g[idx(gx, gy)] == inf) return {};

  PlannedPath path;
  std::vector<int> rev;
  for (int cur = static_cast<int>(idx(gx, gy)); cur != -1;
       cur = parent[cur]) {
    rev.push_back(cur);
  }
  path.waypoints.reserve(rev.size());
  for (auto it = rev.rbegin(); it != rev.rend(); ++it) {
    const int ix = *it % w;
    const int iy = *it / w;
    path.waypoints.push_back(costmap.cell_center(ix, iy));
  }
  path.total_length = 0.0;
  for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
    path.total_length += (path.waypoints[i] - path.waypoints[i - 1]).norm();
  }
  return path;
}

std::optional<Scalar> grid_path_length(const OccupancyGrid& grid,
                                       const Vec2& start, const Vec2& goal) {
  int sx, sy, gx, gy;
  grid.world_to_cell(start, sx, sy);
  grid.world_to_cell(goal, gx, gy);
  if (grid.occupied_or_oob(sx, sy) || grid.occupied_or_oob(gx, gy)) return {};
  // Uniform-cost search on the boolean grid: a radius-0 costmap makes every
  // non-lethal step cost its plain length.
  const Costmap costmap = inflate(grid, 0.0);
  const auto path = plan(costmap, start, goal, 0.0);
  if (!path) return {};
  return path->total_length;
}

Vec2 subgoal(const PlannedPath& path, const Pose2& robot_pose,
             Scalar lookahead) {
  const auto& wp = path.waypoints;
  if (wp.empty()) return robot_pose.position();
  if (wp.size() == 1) return wp.front();

  // Project the robot onto the path; earliest arc length wins ties.
  const Vec2 p = robot_pose.position();
  Scalar best_d2 = std::numeric_limits<Scalar>::infinity();
  Scalar best_arc = 0.0;
  Scalar arc = 0.0;
  for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
    const Vec2 a = wp[i];
    const Vec2 b = wp[i + 1];
    const Vec2 ab = b - a;
    const Scalar len2 = ab.squaredNorm();
    const Scalar t =
        len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const Vec2 proj = a + t * ab;
    const Scalar d2 = (p - proj).squaredNorm();
    if (d2 < best_d2 - 1e-12) {
      best_d2 = d2;
      best_arc = arc + t * std::sqrt(len2);
    }
    arc += std::sqrt(len2);
  }

  // Walk `lookahead` meters beyond the projection.
  Scalar target = best_arc + lookahead;
  arc = 0.0;
  for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
    const Scalar seg = (wp[i + 1] - wp[i]).norm();
    if (arc + seg >= target && seg > 0.0) {
      const Scalar t = (target - arc) / seg;
      return wp[i] + t * (wp[i + 1] - wp[i]);
    }
    arc += seg;
  }
  return wp.back();
}

}  // namespace barnsim
