#include "barnsim/grid.hpp"

#include <algorithm>

namespace barnsim {

std::size_t OccupancyGrid::occupied_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(),
                    [](std::uint8_t c) { return c != 0; }));
}

OccupancyGrid dilate(const OccupancyGrid& grid, Scalar radius) {
  if (radius <= 0.0) return grid;
  const int r = static_cast<int>(std::ceil(radius / grid.resolution));
  // Precompute in-disc offsets once.
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const Scalar d = std::hypot(dx * grid.resolution, dy * grid.resolution);
      if (d <= radius) offsets.emplace_back(dx, dy);
    }
  }
  OccupancyGrid out = grid;
  for (int iy = 0; iy < grid.height; ++iy) {
    for (int ix = 0; ix < grid.width; ++ix) {
      if (!grid.occupied(ix, iy)) continue;
      for (const auto& [dx, dy] : offsets) {
        const int nx = ix + dx;
        const int ny = iy + dy;
        if (out.in_bounds(nx, ny)) out.set(nx, ny, true);
      }
    }
  }
  return out;
}

}  // namespace barnsim
