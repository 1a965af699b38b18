#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "barnsim/env_gen.hpp"
#include "barnsim/motion_tube.hpp"
#include "barnsim/rng.hpp"
#include "barnsim/swept.hpp"
#include "oracles.hpp"

using namespace barnsim;

TEST_SUITE_BEGIN("motion_tube");

namespace {

TubeParams small_params() {
  TubeParams p;
  p.velocity_level_count = 3;
  p.curvatures_per_level = 40;
  return p;
}

LaserScan open_scan(const BeamConfig& cfg) {
  LaserScan scan;
  scan.config = cfg;
  scan.ranges.assign(cfg.beam_count, cfg.max_range);
  return scan;
}

Pose2 random_free_pose(const OccupancyGrid& grid, const Footprint& fp,
                       Xoshiro256ss& rng) {
  for (;;) {
    const Pose2 pose(rng.uniform(0.5, grid.width_m() - 0.5),
                     rng.uniform(0.5, grid.height_m() - 0.5),
                     rng.uniform(-M_PI, M_PI));
    if (!footprint_collides(grid, pose, fp)) return pose;
  }
}

}  // namespace

TEST_CASE("straight tube swept volume is the expected rectangle") {
  TubeParams p = small_params();
  const double margin = p.footprint.inflation_margin;
  const Polygon outline =
      swept_arc_boundary(p.footprint.inflated(), 1.0, 0.0, 1.0, p.d_sample);

  Vec2 lo = outline[0], hi = outline[0];
  for (const Vec2& v : outline) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  // Length = 1 m travel + footprint length + 2 margins; width = footprint
  // width + 2 margins.
  CHECK(hi.x() - lo.x() ==
        doctest::Approx(1.0 + 0.508 + 2 * margin).epsilon(1e-9));
  CHECK(hi.y() - lo.y() == doctest::Approx(0.430 + 2 * margin).epsilon(1e-9));

  // Sample count tracks perimeter / d_sample.
  const double perimeter = 2.0 * (hi.x() - lo.x()) + 2.0 * (hi.y() - lo.y());
  CHECK(static_cast<double>(outline.size()) >= perimeter / p.d_sample - 4);
  CHECK(static_cast<double>(outline.size()) <= 2.5 * perimeter / p.d_sample);

  // Spacing invariant: consecutive samples at most d_sample apart.
  for (std::size_t i = 0; i < outline.size(); ++i) {
    const Vec2& a = outline[i];
    const Vec2& b = outline[(i + 1) % outline.size()];
    CHECK((b - a).norm() <= p.d_sample + 1e-9);
  }
}

TEST_CASE("curved tube boundary spacing and endpoint consistency") {
  TubeParams p = small_params();
  for (double kappa : {0.4, -0.4, 1.7, -1.7}) {
    const double v = 0.8;
    const Polygon outline =
        swept_arc_boundary(p.footprint.inflated(), v, kappa, 1.0, p.d_sample);
    REQUIRE(outline.size() > 100);
    for (std::size_t i = 0; i < outline.size(); ++i) {
      const Vec2& a = outline[i];
      const Vec2& b = outline[(i + 1) % outline.size()];
      CHECK((b - a).norm() <= p.d_sample + 1e-9);
    }
    // The endpoint footprint lies inside the swept region.
    const Pose2 end = arc_endpoint(v, kappa, 1.0);
    CHECK(polygon_contains(outline, end.position()));
    // The start pose footprint does too.
    CHECK(polygon_contains(outline, Vec2(0.0, 0.0)));
  }
}

TEST_CASE("mirrored tubes have exactly mirrored boundary samples") {
  const TubeParams p = small_params();
  const BeamConfig beam;
  const TubeLibrary lib = build_tube_library(p, beam);
  const int m = p.curvatures_per_level;
  for (int level = 0; level < p.velocity_level_count; ++level) {
    for (int j = 0; j < m / 2; ++j) {
      const MotionTube& a = lib.tubes()[level * m + j];
      const MotionTube& b = lib.tubes()[level * m + (m - 1 - j)];
      CHECK(a.kappa == -b.kappa);
      REQUIRE(a.boundary_samples.size() == b.boundary_samples.size());
      // Mirroring reverses the CCW order.
      const std::size_t n = a.boundary_samples.size();
      bool mirrored = true;
      for (std::size_t k = 0; k < n; ++k) {
        const Vec2& pa = a.boundary_samples[k];
        const Vec2& pb = b.boundary_samples[n - 1 - k];
        if (pa.x() != pb.x() || pa.y() != -pb.y()) {
          mirrored = false;
          break;
        }
      }
      CHECK(mirrored);
    }
  }
}

TEST_CASE("beam index equals the brute-force nearest-beam argmin") {
  const TubeParams p = small_params();
  const BeamConfig beam;
  const TubeLibrary lib = build_tube_library(p, beam);
  Xoshiro256ss rng(3);
  for (int pick = 0; pick < 30; ++pick) {
    const MotionTube& tube =
        lib.tubes()[rng.uniform_below(lib.tubes().size())];
    if (tube.beam_projection.empty()) continue;
    const std::size_t k = rng.uniform_below(tube.beam_projection.size());
    // Recover the sample for this projection entry by scanning in order.
    std::size_t proj = 0;
    for (const Vec2& sample : tube.boundary_samples) {
      const double bearing = std::atan2(sample.y(), sample.x());
      if (std::abs(bearing) > 0.5 * beam.fov) continue;
      if (proj == k) {
        int best = 0;
        double best_d = 1e9;
        for (int i = 0; i < beam.beam_count; ++i) {
          const double d = std::abs(bearing - beam.beam_angle(i));
          if (d < best_d) {
            best_d = d;
            best = i;
          }
        }
        CHECK(tube.beam_projection[k].first == best);
        CHECK(tube.beam_projection[k].second ==
              doctest::Approx(sample.norm()).epsilon(1e-12));
        break;
      }
      ++proj;
    }
  }
}

TEST_CASE("library has the declared tube count and is deterministic") {
  const TubeParams p = small_params();
  const BeamConfig beam;
  const TubeLibrary a = build_tube_library(p, beam);
  const TubeLibrary b = build_tube_library(p, beam);
  CHECK(a.size() == p.tube_count());
  CHECK(a == b);
}

TEST_CASE("availability trivial cases") {
  const TubeParams p = small_params();
  const BeamConfig beam;
  const TubeLibrary lib = build_tube_library(p, beam);

  LaserScan open = open_scan(beam);
  for (int i = 0; i < lib.size(); ++i) {
    CHECK(lib.tube_available(i, open));
  }

  // Obstacle 0.1 m dead ahead of the hull blocks the straight tube.
  LaserScan blocked = open_scan(beam);
  const double hull_front = 0.254;
  const int mid = beam.beam_count / 2;
  for (int d = -40; d <= 40; ++d) {
    blocked.ranges[mid + d] = hull_front + 0.1;
  }
  // Straightest tube of the slowest level.
  int straightest = 0;
  for (int i = 0; i < p.curvatures_per_level; ++i) {
    if (std::abs(lib.tubes()[i].kappa) <
        std::abs(lib.tubes()[straightest].kappa))
      straightest = i;
  }
  CHECK_FALSE(lib.tube_available(straightest, blocked));
}

TEST_CASE("tube cost: endpoint hit is minimal, mirror flips ordering, "
          "ordering is monotone in distance") {
  const TubeParams p = small_params();
  const TubeLibrary lib = build_tube_library(p, BeamConfig{});
  const MotionTube& pick = lib.tubes()[17];
  const Vec2 subgoal = pick.endpoint.position();
  const double c_pick = tube_cost(pick, subgoal);
  for (const MotionTube& t : lib.tubes()) {
    if ((t.endpoint.position() - pick.endpoint.position()).norm() > 1e-12) {
      CHECK(tube_cost(t, subgoal) > c_pick);
    }
  }

  // Mirroring the sub-goal mirrors the cost over +/-kappa pairs exactly.
  const Vec2 sg(0.8, 0.33);
  const Vec2 sg_mirror(0.8, -0.33);
  const int m = p.curvatures_per_level;
  for (int j = 0; j < m; ++j) {
    CHECK(tube_cost(lib.tubes()[j], sg) ==
          tube_cost(lib.tubes()[m - 1 - j], sg_mirror));
  }

  // Sorting by cost equals sorting by endpoint distance.
  std::vector<int> by_cost(lib.size()), by_dist(lib.size());
  for (int i = 0; i < lib.size(); ++i) by_cost[i] = by_dist[i] = i;
  auto cost_of = [&](int i) { return tube_cost(lib.tubes()[i], sg); };
  auto dist_of = [&](int i) {
    return (lib.tubes()[i].endpoint.position() - sg).norm();
  };
  std::stable_sort(by_cost.begin(), by_cost.end(),
                   [&](int a, int b) { return cost_of(a) < cost_of(b); });
  std::stable_sort(by_dist.begin(), by_dist.end(),
                   [&](int a, int b) { return dist_of(a) < dist_of(b); });
  CHECK(by_cost == by_dist);
}

TEST_CASE("select_command: single available tube returns its command") {
  TubeParams p = small_params();
  const BeamConfig beam;
  const TubeLibrary lib = build_tube_library(p, beam);
  // Block everything, then free exactly one tube by construction: use a
  // scan that satisfies only tube k's projections.
  const int k = 25;
  LaserScan scan;
  scan.config = beam;
  scan.ranges.assign(beam.beam_count, 1e-3);
  for (const auto& [b, d] : lib.tubes()[k].beam_projection) {
    scan.ranges[b] = std::max(scan.ranges[b], d + 1e-6);
  }
  // The chosen scan may accidentally free other tubes; verify and filter.
  std::vector<std::uint8_t> avail;
  lib.availability(scan, avail);
  double wsum = 0, vsum = 0, osum = 0;
  for (int i = 0; i < lib.size(); ++i) {
    if (!avail[i]) continue;
    const double w =
        1.0 / (tube_cost(lib.tubes()[i], Vec2(1.0, 0.0)) + p.weight_epsilon);
    wsum += w;
    vsum += w * lib.tubes()[i].v;
    osum += w * lib.tubes()[i].v * lib.tubes()[i].kappa;
  }
  REQUIRE(avail[k]);
  const auto cmd = select_command(lib, scan, Vec2(1.0, 0.0));
  REQUIRE(cmd.has_value());
  CHECK(cmd->v == doctest::Approx(vsum / wsum).epsilon(1e-12));
  CHECK(cmd->omega == doctest::Approx(osum / wsum).epsilon(1e-12));
}

TEST_CASE("select_command returns Unsafe when nothing is available") {
  const TubeLibrary lib = build_tube_library(small_params(), BeamConfig{});
  LaserScan scan;
  scan.config = lib.beam_config();
  scan.ranges.assign(lib.beam_config().beam_count, 1e-3);
  CHECK_FALSE(select_command(lib, scan, Vec2(1.0, 0.0)).has_value());
}

TEST_CASE("selected command lies in the hull of available (v, v*kappa)") {
  const TubeParams p = small_params();
  const BeamConfig beam;
  const TubeLibrary lib = build_tube_library(p, beam);
  Xoshiro256ss rng(77);
  const EnvSpec env = generate_environment(9, {});
  for (int trial = 0; trial < 20; ++trial) {
    const Pose2 pose = random_free_pose(env.grid, p.footprint, rng);
    const LaserScan scan = raycast_scan(env.grid, pose, beam);
    const Vec2 sg(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const auto cmd = select_command(lib, scan, sg);
    if (!cmd) continue;
    // Hull membership: the command is a convex combination, so it must lie
    // within the axis-aligned bounds and on the correct side of every hull
    // edge of the available (v, omega) points.
    std::vector<Vec2> pts;
    for (int i = 0; i < lib.size(); ++i) {
      if (lib.tube_available(i, scan)) {
        pts.emplace_back(lib.tubes()[i].v,
                         lib.tubes()[i].v * lib.tubes()[i].kappa);
      }
    }
    REQUIRE_FALSE(pts.empty());
    const Polygon hull = convex_hull(pts);
    const Vec2 q(cmd->v, cmd->omega);
    if (hull.size() >= 3) {
      // allow boundary membership within epsilon
      bool ok = polygon_contains(hull, q);
      if (!ok) ok = polygon_boundary_distance(hull, q) < 1e-9;
      CHECK(ok);
    } else {
      // Degenerate hull: must lie on the segment/point.
      double best = 1e9;
      for (std::size_t i = 0; i + 1 < hull.size() || i < 1; ++i) {
        const Vec2& a = hull[i % hull.size()];
        const Vec2& b = hull[(i + 1) % hull.size()];
        best = std::min(best, segment_point_distance(a, b, q));
        if (hull.size() < 2) break;
      }
      CHECK(best < 1e-9);
    }
  }
}

TEST_CASE("per-tick safety soundness: executing an available tube keeps the "
          "swept footprint clear of every scan return") {
  const TubeParams p = small_params();
  const BeamConfig beam;
  const TubeLibrary lib = build_tube_library(p, beam);
  Xoshiro256ss rng(31);
  int checked_tubes = 0;
  for (std::uint64_t seed = 40; seed < 80 && checked_tubes < 150; ++seed) {
    const EnvSpec env = generate_environment(seed, {});
    const Pose2 pose = random_free_pose(env.grid, p.footprint, rng);
    const LaserScan scan = raycast_scan(env.grid, pose, beam);
    const auto endpoints = scan_endpoints_robot(scan);
    for (int i = 0; i < lib.size(); ++i) {
      if (!lib.tube_available(i, scan)) continue;
      ++checked_tubes;
      const MotionTube& tube = lib.tubes()[i];
      // Roll the physical footprint along the arc; the 0.04 m margin in
      // the library is what absorbs sampling discretization.
      const int steps = 60;
      for (int s = 0; s <= steps; ++s) {
        const Pose2 at =
            arc_endpoint(tube.v, tube.kappa, p.horizon * s / steps);
        const Polygon fp = transform_polygon(p.footprint.polygon, at);
        for (const Vec2& e : endpoints) {
          CHECK_FALSE(polygon_contains(fp, e));
        }
      }
    }
  }
  CHECK(checked_tubes > 100);
}

TEST_CASE("sensor-space availability agrees with the Cartesian "
          "swept-volume oracle (unit-scale fixture set)") {
  const TubeParams p = small_params();
  const BeamConfig beam;
  const TubeLibrary lib = build_tube_library(p, beam);

  std::vector<oracles::SweptRegionOracle> masks;
  std::vector<std::pair<Vec2, Vec2>> boxes;
  const double tol = 0.05 * std::sqrt(2.0);  // one fine-grid cell diagonal
  for (const MotionTube& t : lib.tubes()) {
    masks.emplace_back(t.boundary_samples, tol);
    Vec2 lo, hi;
    masks.back().bbox(lo, hi);
    boxes.emplace_back(lo, hi);
  }

  Xoshiro256ss rng(8);
  int unsafe_disagreements = 0;
  int conservative_disagreements = 0;
  for (std::uint64_t seed = 100; seed < 106; ++seed) {
    const EnvSpec env = generate_environment(seed, {});
    const Pose2 pose = random_free_pose(env.grid, p.footprint, rng);
    const LaserScan scan = raycast_scan(env.grid, pose, beam);

    std::vector<Vec2> occupied_robot;
    for (int iy = 0; iy < env.grid.height; ++iy) {
      for (int ix = 0; ix < env.grid.width; ++ix) {
        if (env.grid.occupied(ix, iy))
          occupied_robot.push_back(pose.to_local(env.grid.cell_center(ix, iy)));
      }
    }
    for (int i = 0; i < lib.size(); ++i) {
      if (lib.tubes()[i].blind) continue;
      const bool avail = lib.tube_available(i, scan);
      bool intruded = false;
      bool boundary = false;
      for (const Vec2& c : occupied_robot) {
        if (c.x() < boxes[i].first.x() || c.x() > boxes[i].second.x() ||
            c.y() < boxes[i].first.y() || c.y() > boxes[i].second.y())
          continue;
        const auto r = masks[i].classify(c);
        if (r == oracles::Region::kInside) {
          intruded = true;
          break;
        }
        if (r == oracles::Region::kBoundary) boundary = true;
      }
      // Soundness, strict: an available tube's volume must be clear.
      if (avail && intruded) ++unsafe_disagreements;
      // Completeness: every rejection needs a Cartesian cause - an
      // intruding cell, a boundary-tolerance cell, or an occupied cell
      // occluding the sight line to part of the swept boundary.
      if (!avail && !intruded && !boundary &&
          !oracles::sight_lines_blocked(lib.tubes()[i].boundary_samples,
                                        occupied_robot,
                                        env.grid.resolution)) {
        ++conservative_disagreements;
      }
    }
  }
  CHECK(unsafe_disagreements == 0);
  CHECK(conservative_disagreements == 0);
}

TEST_CASE("library dump/load round-trips exactly") {
  namespace fs = std::filesystem;
  const TubeParams p = small_params();
  const TubeLibrary lib = build_tube_library(p, BeamConfig{});
  const std::string path =
      (fs::temp_directory_path() / "barnsim_tubes.bin").string();
  save_tube_library(lib, path);
  const TubeLibrary back = load_tube_library(path);
  CHECK(back == lib);
  CHECK(back.params().d_sample == p.d_sample);
  CHECK(back.params().footprint.polygon.size() ==
        p.footprint.polygon.size());
  CHECK_THROWS(load_tube_library("/nonexistent/tubes.bin"));
}

TEST_SUITE_END();
