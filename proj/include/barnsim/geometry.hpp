#ifndef BARNSIM_GEOMETRY_HPP
#define BARNSIM_GEOMETRY_HPP

#include <vector>

#include "barnsim/types.hpp"

namespace barnsim {

struct OccupancyGrid;

// Normalizes an angle to (-pi, pi]; a result of exactly -pi maps to +pi.
Scalar normalize_angle(Scalar theta);

inline Scalar angle_diff(Scalar a, Scalar b) { return normalize_angle(a - b); }

// Planar pose. theta is kept normalized to (-pi, pi] by all operations here.
struct Pose2 {
  Scalar x = 0.0;
  Scalar y = 0.0;
  Scalar theta = 0.0;

  Pose2() = default;
  Pose2(Scalar x_, Scalar y_, Scalar theta_) : x(x_), y(y_), theta(theta_) {}

  Vec2 position() const { return Vec2(x, y); }
  Rot2 rotation() const { return Rot2(theta); }

  // Maps a point expressed in this pose's frame into the parent frame.
  Vec2 transform(const Vec2& local) const {
    return position() + rotation() * local;
  }
  // Inverse of transform().
  Vec2 to_local(const Vec2& world) const {
    return rotation().inverse() * (world - position());
  }
  // Frame composition: (this * other) expresses `other` in this pose's parent.
  Pose2 compose(const Pose2& other) const {
    const Vec2 p = transform(Vec2(other.x, other.y));
    return Pose2(p.x(), p.y(), normalize_angle(theta + other.theta));
  }
};

// Unicycle velocity command.
struct Twist {
  Scalar v = 0.0;      // forward speed, m/s
  Scalar omega = 0.0;  // angular rate, rad/s

  Twist() = default;
  Twist(Scalar v_, Scalar omega_) : v(v_), omega(omega_) {}
};

using Polygon = std::vector<Vec2>;  // CCW vertex list

Scalar polygon_signed_area(const Polygon& poly);
bool polygon_is_convex_ccw(const Polygon& poly);
bool polygon_contains(const Polygon& poly, const Vec2& p);
Polygon transform_polygon(const Polygon& poly, const Pose2& pose);

// Offsets every edge of a convex CCW polygon outward by `margin` and
// intersects the supporting lines. Corners are mitered, so the result
// strictly contains the disc-Minkowski inflation.
Polygon inflate_convex_polygon(const Polygon& poly, Scalar margin);

// Unsigned distance from p to the closed polyline boundary of poly.
Scalar polygon_boundary_distance(const Polygon& poly, const Vec2& p);

Scalar segment_point_distance(const Vec2& a, const Vec2& b, const Vec2& p);

// Robot collision shape: convex CCW polygon in the robot frame that
// contains the origin, plus the inflation margin used for planning checks.
struct Footprint {
  Polygon polygon;
  Scalar inflation_margin = 0.0;

  Polygon inflated() const {
    return inflate_convex_polygon(polygon, inflation_margin);
  }
};

// Axis-aligned rectangle centered on the origin. Default dimensions match
// a Clearpath Jackal body (0.508 m x 0.430 m).
Footprint make_rectangle_footprint(Scalar length = 0.508, Scalar width = 0.430,
                                   Scalar inflation_margin = 0.0);

// Pose reached from the origin after applying twist (v, omega) for time t.
// Closed-form arc integration, continuous at omega = 0.
Pose2 arc_pose(Scalar v, Scalar omega, Scalar t);

// Pose reached from the origin after following curvature kappa at speed v
// for time t. Continuous at kappa = 0.
Pose2 arc_endpoint(Scalar v, Scalar kappa, Scalar t);

// Exact closed-form unicycle step (straight line or circular arc).
Pose2 integrate_unicycle(const Pose2& state, const Twist& cmd, Scalar dt);

// True iff the physical footprint polygon placed at `pose` overlaps any
// occupied cell. Poses or polygon parts outside the grid count as collision.
bool footprint_collides(const OccupancyGrid& grid, const Pose2& pose,
                        const Footprint& footprint);

// Exact convex-polygon vs axis-aligned-box overlap test (separating axes).
bool convex_polygon_intersects_aabb(const Polygon& poly,
                                    const std::vector<Vec2>& edge_normals,
                                    const Vec2& box_min, const Vec2& box_max);

std::vector<Vec2> polygon_edge_normals(const Polygon& poly);

}  // namespace barnsim

#endif
