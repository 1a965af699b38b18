#include "barnsim/env_gen.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

#include "barnsim/planner.hpp"
#include "barnsim/rng.hpp"

namespace barnsim {

namespace {

bool is_boundary(const OccupancyGrid& g, int ix, int iy) {
  return ix == 0 || iy == 0 || ix == g.width - 1 || iy == g.height - 1;
}

// 8-connected flood fill over free cells, restricted by a predicate.
template <typename Pred>
std::vector<int> flood_component(const OccupancyGrid& g, int sx, int sy,
                                 Pred in_region, std::vector<char>& visited) {
  std::vector<int> cells;
  std::deque<std::pair<int, int>> queue;
  queue.emplace_back(sx, sy);
  visited[g.index(sx, sy)] = 1;
  while (!queue.empty()) {
    auto [cx, cy] = queue.front();
    queue.pop_front();
    cells.push_back(static_cast<int>(g.index(cx, cy)));
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = cx + dx;
        const int ny = cy + dy;
        if (!g.in_bounds(nx, ny) || g.occupied(nx, ny)) continue;
        if (!in_region(nx, ny) || visited[g.index(nx, ny)]) continue;
        visited[g.index(nx, ny)] = 1;
        queue.emplace_back(nx, ny);
      }
    }
  }
  return cells;
}

// Center cell of the largest free component inside a row band of the
// dilated grid. Returns false when the band has no free cell.
bool band_center(const OccupancyGrid& g, int row_lo, int row_hi, int& out_x,
                 int& out_y) {
  std::vector<char> visited(g.cells.size(), 0);
  auto in_band = [&](int, int iy) { return iy >= row_lo && iy <= row_hi; };
  std::vector<int> best;
  for (int iy = row_lo; iy <= row_hi; ++iy) {
    for (int ix = 0; ix < g.width; ++ix) {
      if (g.occupied(ix, iy) || visited[g.index(ix, iy)]) continue;
      std::vector<int> comp = flood_component(g, ix, iy, in_band, visited);
      if (comp.size() > best.size()) best = std::move(comp);
    }
  }
  if (best.empty()) return false;
  // Snap the centroid to the nearest component cell.
  Scalar cx = 0.0, cy = 0.0;
  for (int idx : best) {
    cx += idx % g.width;
    cy += idx / g.width;
  }
  cx /= best.size();
  cy /= best.size();
  Scalar best_d2 = std::numeric_limits<Scalar>::infinity();
  for (int idx : best) {
    const int ix = idx % g.width;
    const int iy = idx / g.width;
    const Scalar d2 = (ix - cx) * (ix - cx) + (iy - cy) * (iy - cy);
    if (d2 < best_d2) {
      best_d2 = d2;
      out_x = ix;
      out_y = iy;
    }
  }
  return true;
}

bool cells_connected(const OccupancyGrid& g, int sx, int sy, int gx, int gy) {
  if (g.occupied_or_oob(sx, sy) || g.occupied_or_oob(gx, gy)) return false;
  std::vector<char> visited(g.cells.size(), 0);
  auto anywhere = [](int, int) { return true; };
  for (int idx : flood_component(g, sx, sy, anywhere, visited)) {
    if (idx == static_cast<int>(g.index(gx, gy))) return true;
  }
  return false;
}

OccupancyGrid rasterize_fine(const OccupancyGrid& coarse, Scalar fine_res) {
  const int w = static_cast<int>(std::lround(coarse.width_m() / fine_res));
  const int h = static_cast<int>(std::lround(coarse.height_m() / fine_res));
  OccupancyGrid fine(w, h, fine_res, coarse.origin);
  for (int iy = 0; iy < h; ++iy) {
    for (int ix = 0; ix < w; ++ix) {
      const Vec2 c = fine.cell_center(ix, iy);
      fine.set(ix, iy, coarse.point_occupied_or_oob(c));
    }
  }
  return fine;
}

}  // namespace

OccupancyGrid smooth_step(const OccupancyGrid& grid, int threshold) {
  if (threshold < 0 || threshold > 8)
    throw std::invalid_argument("smooth_step: threshold outside [0, 8]");
  OccupancyGrid out = grid;
  for (int iy = 0; iy < grid.height; ++iy) {
    for (int ix = 0; ix < grid.width; ++ix) {
      if (is_boundary(grid, ix, iy)) {
        out.set(ix, iy, true);
        continue;
      }
      int occupied = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;  // self excluded
          if (grid.occupied_or_oob(ix + dx, iy + dy)) ++occupied;
        }
      }
      out.set(ix, iy, occupied >= threshold);
    }
  }
  return out;
}

Scalar interior_occupied_fraction(const OccupancyGrid& grid) {
  int occupied = 0, total = 0;
  for (int iy = 1; iy + 1 < grid.height; ++iy) {
    for (int ix = 1; ix + 1 < grid.width; ++ix) {
      ++total;
      if (grid.occupied(ix, iy)) ++occupied;
    }
  }
  return total > 0 ? static_cast<Scalar>(occupied) / total : 0.0;
}

Scalar optimal_path_length(const OccupancyGrid& grid, const Vec2& start,
                           const Vec2& goal) {
  int sx, sy, gx, gy;
  grid.world_to_cell(start, sx, sy);
  grid.world_to_cell(goal, gx, gy);
  if (grid.occupied_or_oob(sx, sy))
    throw std::invalid_argument("optimal_path_length: start cell occupied");
  if (grid.occupied_or_oob(gx, gy))
    throw std::invalid_argument("optimal_path_length: goal cell occupied");
  const auto length = grid_path_length(grid, start, goal);
  if (!length) throw EnvGenError("optimal_path_length: no path");
  return *length;
}

EnvSpec generate_environment(std::uint64_t seed, const CaParams& params) {
  if (params.fill_probability <= 0.0 || params.fill_probability >= 1.0)
    throw std::invalid_argument("generate_environment: fill probability");
  if (params.smoothing_iterations < 0)
    throw std::invalid_argument("generate_environment: iterations < 0");

  for (int attempt = 0; attempt < params.max_retries; ++attempt) {
    Xoshiro256ss rng(seed ^ static_cast<std::uint64_t>(attempt));

    // Seed the coarse grid: walled boundary, random interior fill.
    OccupancyGrid coarse(params.ca_width, params.ca_height,
                         params.ca_resolution);
    for (int iy = 0; iy < coarse.height; ++iy) {
      for (int ix = 0; ix < coarse.width; ++ix) {
        const bool occ = is_boundary(coarse, ix, iy)
                             ? true
                             : rng.uniform01() < params.fill_probability;
        coarse.set(ix, iy, occ);
      }
    }
    for (int i = 0; i < params.smoothing_iterations; ++i)
      coarse = smooth_step(coarse, params.neighbor_threshold);

    OccupancyGrid fine = rasterize_fine(coarse, params.fine_resolution);

    // Place start and goal where the robot can also rotate in place, and
    // require the body-dilated grid to connect them so the course is
    // actually traversable, not just point-connected.
    const OccupancyGrid dilated = dilate(fine, params.clearance_radius);
    const OccupancyGrid endpoint_dilated =
        dilate(fine, std::max(params.clearance_radius,
                              params.endpoint_clearance));
    const int band_cells = std::max(
        1, static_cast<int>(std::lround(params.band_depth / fine.resolution)));
    int sx, sy, gx, gy;
    if (!band_center(endpoint_dilated, 0, band_cells - 1, sx, sy)) continue;
    if (!band_center(endpoint_dilated, fine.height - band_cells,
                     fine.height - 1, gx, gy))
      continue;
    if (!cells_connected(dilated, sx, sy, gx, gy)) continue;

    EnvSpec env;
    env.grid = std::move(fine);
    const Vec2 start_p = env.grid.cell_center(sx, sy);
    env.start = Pose2(start_p.x(), start_p.y(), M_PI / 2.0);  // facing goal
    env.goal = env.grid.cell_center(gx, gy);
    env.path_length =
        optimal_path_length(env.grid, env.start.position(), env.goal);
    env.seed = seed;
    return env;
  }
  throw EnvGenError("generate_environment: no connected course for seed " +
                    std::to_string(seed) + " after " +
                    std::to_string(params.max_retries) + " attempts");
}

namespace {

std::string format_double(Scalar v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string grid_to_text(const OccupancyGrid& grid) {
  std::ostringstream out;
  out << grid.width << "\n" << grid.height << "\n";
  out << format_double(grid.resolution) << "\n";
  out << "origin " << format_double(grid.origin.x()) << " "
      << format_double(grid.origin.y()) << "\n";
  for (int iy = grid.height - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < grid.width; ++ix)
      out << (grid.occupied(ix, iy) ? '#' : '.');
    out << "\n";
  }
  return out.str();
}

OccupancyGrid grid_from_text(const std::string& text) {
  std::istringstream in(text);
  int width = 0, height = 0;
  Scalar resolution = 0.0;
  std::string origin_tag;
  Scalar ox = 0.0, oy = 0.0;
  if (!(in >> width >> height >> resolution >> origin_tag >> ox >> oy) ||
      origin_tag != "origin" || width <= 0 || height <= 0 || resolution <= 0)
    throw std::runtime_error("grid_from_text: malformed header");
  std::string line;
  std::getline(in, line);  // consume end of header line
  OccupancyGrid grid(width, height, resolution, Vec2(ox, oy));
  for (int iy = height - 1; iy >= 0; --iy) {
    if (!std::getline(in, line) || static_cast<int>(line.size()) < width)
      throw std::runtime_error("grid_from_text: truncated rows");
    for (int ix = 0; ix < width; ++ix) {
      const char c = line[ix];
      if (c != '#' && c != '.')
        throw std::runtime_error("grid_from_text: bad cell character");
      grid.set(ix, iy, c == '#');
    }
  }
  return grid;
}

std::string env_meta_to_text(const EnvSpec& env) {
  std::ostringstream out;
  out << "seed=" << env.seed << "\n";
  out << "start_x=" << format_double(env.start.x) << "\n";
  out << "start_y=" << format_double(env.start.y) << "\n";
  out << "start_theta=" << format_double(env.start.theta) << "\n";
  out << "goal_x=" << format_double(env.goal.x()) << "\n";
  out << "goal_y=" << format_double(env.goal.y()) << "\n";
  out << "path_length=" << format_double(env.path_length) << "\n";
  return out.str();
}

EnvSpec env_from_text(const std::string& map_text,
                      const std::string& meta_text) {
  EnvSpec env;
  env.grid = grid_from_text(map_text);
  std::istringstream in(meta_text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("env_from_text: malformed metadata line");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "seed") env.seed = std::stoull(value);
    else if (key == "start_x") env.start.x = std::stod(value);
    else if (key == "start_y") env.start.y = std::stod(value);
    else if (key == "start_theta") env.start.theta = std::stod(value);
    else if (key == "goal_x") env.goal.x() = std::stod(value);
    else if (key == "goal_y") env.goal.y() = std::stod(value);
    else if (key == "path_length") env.path_length = std::stod(value);
    else throw std::runtime_error("env_from_text: unknown key " + key);
  }
  return env;
}

void save_env(const EnvSpec& env, const std::string& map_path,
              const std::string& meta_path) {
  std::ofstream map_file(map_path, std::ios::binary);
  if (!map_file) throw std::runtime_error("save_env: cannot open " + map_path);
  map_file << grid_to_text(env.grid);
  std::ofstream meta_file(meta_path, std::ios::binary);
  if (!meta_file)
    throw std::runtime_error("save_env: cannot open " + meta_path);
  meta_file << env_meta_to_text(env);
}

EnvSpec load_env(const std::string& map_path, const std::string& meta_path) {
  std::ifstream map_file(map_path, std::ios::binary);
  if (!map_file) throw std::runtime_error("load_env: cannot open " + map_path);
  std::stringstream map_text;
  map_text << map_file.rdbuf();
  std::ifstream meta_file(meta_path, std::ios::binary);
  if (!meta_file)
    throw std::runtime_error("load_env: cannot open " + meta_path);
  std::stringstream meta_text;
  meta_text << meta_file.rdbuf();
  return env_from_text(map_text.str(), meta_text.str());
}

}  // namespace barnsim
