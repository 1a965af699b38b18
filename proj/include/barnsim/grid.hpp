#ifndef BARNSIM_GRID_HPP
#define BARNSIM_GRID_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "barnsim/types.hpp"

namespace barnsim {

// Discretized 2D obstacle map. Cells are stored row-major (index =
// iy * width + ix); `origin` is the world position of the lower-left
// corner of cell (0, 0). Cell (ix, iy) covers
// [origin + (ix, iy) * res, origin + (ix+1, iy+1) * res).
struct OccupancyGrid {
  int width = 0;
  int height = 0;
  Scalar resolution = 0.05;
  Vec2 origin = Vec2::Zero();
  std::vector<std::uint8_t> cells;

  OccupancyGrid() = default;
  OccupancyGrid(int w, int h, Scalar res, const Vec2& org = Vec2::Zero())
      : width(w), height(h), resolution(res), origin(org),
        cells(static_cast<std::size_t>(w) * h, 0) {}

  bool in_bounds(int ix, int iy) const {
    return ix >= 0 && ix < width && iy >= 0 && iy < height;
  }
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * width + ix;
  }
  bool occupied(int ix, int iy) const { return cells[index(ix, iy)] != 0; }
  // Out-of-bounds cells are treated as occupied.
  bool occupied_or_oob(int ix, int iy) const {
    return !in_bounds(ix, iy) || occupied(ix, iy);
  }
  void set(int ix, int iy, bool occ) { cells[index(ix, iy)] = occ ? 1 : 0; }

  Vec2 cell_center(int ix, int iy) const {
    return origin + Vec2((ix + 0.5) * resolution, (iy + 0.5) * resolution);
  }
  // Cell containing a world point (floor convention; points exactly on a
  // cell boundary belong to the upper cell).
  void world_to_cell(const Vec2& p, int& ix, int& iy) const {
    ix = static_cast<int>(std::floor((p.x() - origin.x()) / resolution));
    iy = static_cast<int>(std::floor((p.y() - origin.y()) / resolution));
  }
  bool point_in_bounds(const Vec2& p) const {
    int ix, iy;
    world_to_cell(p, ix, iy);
    return in_bounds(ix, iy);
  }
  bool point_occupied_or_oob(const Vec2& p) const {
    int ix, iy;
    world_to_cell(p, ix, iy);
    return occupied_or_oob(ix, iy);
  }

  Scalar width_m() const { return width * resolution; }
  Scalar height_m() const { return height * resolution; }

  std::size_t occupied_count() const;
  bool operator==(const OccupancyGrid& other) const = default;
};

// Dilates occupied cells by a metric radius (cell centers within `radius`
// of any occupied cell center become occupied).
OccupancyGrid dilate(const OccupancyGrid& grid, Scalar radius);

}  // namespace barnsim

#endif
