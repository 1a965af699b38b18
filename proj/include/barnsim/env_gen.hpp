#ifndef BARNSIM_ENV_GEN_HPP
#define BARNSIM_ENV_GEN_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include "barnsim/geometry.hpp"
#include "barnsim/grid.hpp"

namespace barnsim {

// Cellular-automaton course generator parameters. The coarse CA grid is
// rasterized to a fine grid for raycasting and collision checking.
struct CaParams {
  int ca_width = 30;
  int ca_height = 30;
  Scalar ca_resolution = 0.1667;  // ~5 m x 5 m course
  Scalar fill_probability = 0.50;
  int smoothing_iterations = 3;
  int neighbor_threshold = 5;  // occupy iff >= threshold of 8 neighbors
  Scalar fine_resolution = 0.05;
  // Start/goal placement and connectivity are checked on the grid dilated
  // by this radius so the generated course is traversable by the robot
  // body, not just by a point.
  Scalar clearance_radius = 0.35;
  // Start and goal cells additionally keep this much clearance: the robot
  // must be able to rotate in place (circumradius + jitter) at both ends.
  Scalar endpoint_clearance = 0.42;
  Scalar band_depth = 0.80;  // start/goal bands at the bottom/top, meters
  int max_retries = 100;
};

struct EnvSpec {
  OccupancyGrid grid;  // fine grid (walled arena)
  Pose2 start;
  Vec2 goal = Vec2::Zero();
  Scalar path_length = 0.0;  // shortest grid path start->goal, meters
  std::uint64_t seed = 0;
};

class EnvGenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One cellular-automaton smoothing pass: each interior cell becomes
// occupied iff at least `threshold` of its 8 neighbors are occupied (the
// cell itself is not counted). Boundary cells stay occupied.
OccupancyGrid smooth_step(const OccupancyGrid& grid, int threshold);

// Deterministic course generation. Connectivity is enforced by rejection:
// attempt k reseeds the PRNG with seed XOR k. Throws EnvGenError when no
// connected course is found within max_retries attempts.
EnvSpec generate_environment(std::uint64_t seed, const CaParams& params = {});

// Shortest 8-connected path between the cells containing start and goal,
// in meters (diagonal steps cost sqrt(2) * resolution). Throws
// std::invalid_argument when an endpoint cell is occupied and EnvGenError
// when no path exists.
Scalar optimal_path_length(const OccupancyGrid& grid, const Vec2& start,
                           const Vec2& goal);

// Occupied fraction over the interior (non-boundary) cells.
Scalar interior_occupied_fraction(const OccupancyGrid& grid);

// Map text format: a 4-line header (width_cells, height_cells, resolution,
// "origin x y") followed by height rows of '#'/'.'; rows are written top
// row first. Numbers use round-trip precision so save/load is bit exact.
std::string grid_to_text(const OccupancyGrid& grid);
OccupancyGrid grid_from_text(const std::string& text);

// Sidecar metadata record (line-oriented key=value).
std::string env_meta_to_text(const EnvSpec& env);
// Rebuilds an EnvSpec from map + metadata text.
EnvSpec env_from_text(const std::string& map_text,
                      const std::string& meta_text);

void save_env(const EnvSpec& env, const std::string& map_path,
              const std::string& meta_path);
EnvSpec load_env(const std::string& map_path, const std::string& meta_path);

}  // namespace barnsim

#endif
