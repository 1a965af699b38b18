#include "barnsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "barnsim/grid.hpp"

namespace barnsim {

Scalar normalize_angle(Scalar theta) {
  Scalar a = std::remainder(theta, 2.0 * M_PI);
  if (a <= -M_PI) a = M_PI;  // ties at +/-pi resolve to +pi
  return a;
}

Scalar polygon_signed_area(const Polygon& poly) {
  Scalar twice_area = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    twice_area += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice_area;
}

bool polygon_is_convex_ccw(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e1 = poly[(i + 1) % n] - poly[i];
    const Vec2 e2 = poly[(i + 2) % n] - poly[(i + 1) % n];
    if (e1.x() * e2.y() - e1.y() * e2.x() < 0.0) return false;
  }
  return true;
}

bool polygon_contains(const Polygon& poly, const Vec2& p) {
  // Even-odd crossing test; works for any simple polygon.
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const Scalar x_cross =
          a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

Polygon transform_polygon(const Polygon& poly, const Pose2& pose) {
  Polygon out;
  out.reserve(poly.size());
  const Rot2 rot = pose.rotation();
  const Vec2 t = pose.position();
  for (const Vec2& v : poly) out.push_back(t + rot * v);
  return out;
}

namespace {

// Axis-aligned rectangles inflate exactly by coordinate offsets, which
// also keeps them bitwise symmetric about both axes.
bool axis_aligned_rectangle(const Polygon& poly) {
  if (poly.size() != 4) return false;
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 e = poly[(i + 1) % 4] - poly[i];
    if (e.x() != 0.0 && e.y() != 0.0) return false;
  }
  return true;
}

}  // namespace

Polygon inflate_convex_polygon(const Polygon& poly, Scalar margin) {
  if (margin == 0.0) return poly;
  if (margin < 0.0) throw std::invalid_argument("inflation margin < 0");
  if (axis_aligned_rectangle(poly)) {
    Vec2 center = Vec2::Zero();
    for (const Vec2& v : poly) center += 0.25 * v;
    Polygon out;
    out.reserve(4);
    for (const Vec2& v : poly) {
      out.emplace_back(v.x() + std::copysign(margin, v.x() - center.x()),
                       v.y() + std::copysign(margin, v.y() - center.y()));
    }
    return out;
  }
  const std::size_t n = poly.size();
  // Shift each edge outward along its normal, then intersect consecutive
  // supporting lines to recover the vertices.
  struct Line {
    Vec2 point;
    Vec2 dir;
  };
  std::vector<Line> lines(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const Vec2 dir = (b - a).normalized();
    const Vec2 outward(dir.y(), -dir.x());  // right normal of a CCW edge
    lines[i] = {a + margin * outward, dir};
  }
  Polygon out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Line& l1 = lines[(i + n - 1) % n];
    const Line& l2 = lines[i];
    const Scalar denom = l1.dir.x() * l2.dir.y() - l1.dir.y() * l2.dir.x();
    if (std::abs(denom) < 1e-12) {
      out[i] = l2.point;  // collinear edges: keep the shifted vertex
      continue;
    }
    const Vec2 d = l2.point - l1.point;
    const Scalar t = (d.x() * l2.dir.y() - d.y() * l2.dir.x()) / denom;
    out[i] = l1.point + t * l1.dir;
  }
  return out;
}

Scalar segment_point_distance(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  if (len2 <= 0.0) return (p - a).norm();
  const Scalar t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

Scalar polygon_boundary_distance(const Polygon& poly, const Vec2& p) {
  Scalar best = std::numeric_limits<Scalar>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, segment_point_distance(poly[i], poly[(i + 1) % n], p));
  }
  return best;
}

Footprint make_rectangle_footprint(Scalar length, Scalar width,
                                   Scalar inflation_margin) {
  const Scalar hx = 0.5 * length;
  const Scalar hy = 0.5 * width;
  Footprint fp;
  fp.polygon = {Vec2(hx, -hy), Vec2(hx, hy), Vec2(-hx, hy), Vec2(-hx, -hy)};
  fp.inflation_margin = inflation_margin;
  return fp;
}

namespace {

// sin(a)/w and (1-cos(a))/w with a = w*t, stable for small |a|.
// Factored as t * f(a) so both terms stay continuous at w = 0.
void arc_terms(Scalar a, Scalar t, Scalar& sin_term, Scalar& cos_term) {
  if (std::abs(a) < 1e-6) {
    const Scalar a2 = a * a;
    sin_term = t * (1.0 - a2 / 6.0 + a2 * a2 / 120.0);
    cos_term = t * (a / 2.0 - a2 * a / 24.0 + a2 * a2 * a / 720.0);
  } else {
    const Scalar w = a / t;
    sin_term = std::sin(a) / w;
    cos_term = (1.0 - std::cos(a)) / w;
  }
}

}  // namespace

Pose2 arc_pose(Scalar v, Scalar omega, Scalar t) {
  const Scalar a = omega * t;
  Scalar sin_term, cos_term;
  arc_terms(a, t, sin_term, cos_term);
  return Pose2(v * sin_term, v * cos_term, normalize_angle(a));
}

Pose2 arc_endpoint(Scalar v, Scalar kappa, Scalar t) {
  if (t < 0.0) throw std::invalid_argument("arc_endpoint: t < 0");
  return arc_pose(v, v * kappa, t);
}

Pose2 integrate_unicycle(const Pose2& state, const Twist& cmd, Scalar dt) {
  if (dt <= 0.0) throw std::invalid_argument("integrate_unicycle: dt <= 0");
  return state.compose(arc_pose(cmd.v, cmd.omega, dt));
}

std::vector<Vec2> polygon_edge_normals(const Polygon& poly) {
  std::vector<Vec2> normals;
  normals.reserve(poly.size());
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = poly[(i + 1) % n] - poly[i];
    normals.emplace_back(-e.y(), e.x());
  }
  return normals;
}

namespace {

void project_polygon(const Polygon& poly, const Vec2& axis, Scalar& lo,
                     Scalar& hi) {
  lo = hi = poly[0].dot(axis);
  for (std::size_t i = 1; i < poly.size(); ++i) {
    const Scalar d = poly[i].dot(axis);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
}

void project_aabb(const Vec2& box_min, const Vec2& box_max, const Vec2& axis,
                  Scalar& lo, Scalar& hi) {
  lo = hi = 0.0;
  for (int corner = 0; corner < 4; ++corner) {
    const Vec2 p((corner & 1) ? box_max.x() : box_min.x(),
                 (corner & 2) ? box_max.y() : box_min.y());
    const Scalar d = p.dot(axis);
    if (corner == 0) {
      lo = hi = d;
    } else {
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
}

}  // namespace

bool convex_polygon_intersects_aabb(const Polygon& poly,
                                    const std::vector<Vec2>& edge_normals,
                                    const Vec2& box_min, const Vec2& box_max) {
  Scalar plo, phi;
  // Box axes.
  project_polygon(poly, Vec2(1, 0), plo, phi);
  if (phi < box_min.x() || plo > box_max.x()) return false;
  project_polygon(poly, Vec2(0, 1), plo, phi);
  if (phi < box_min.y() || plo > box_max.y()) return false;
  // Polygon edge normals.
  for (const Vec2& axis : edge_normals) {
    Scalar blo, bhi;
    project_polygon(poly, axis, plo, phi);
    project_aabb(box_min, box_max, axis, blo, bhi);
    if (phi < blo || plo > bhi) return false;
  }
  return true;
}

bool footprint_collides(const OccupancyGrid& grid, const Pose2& pose,
                        const Footprint& footprint) {
  if (!grid.point_in_bounds(pose.position())) return true;
  const Polygon poly = transform_polygon(footprint.polygon, pose);
  const std::vector<Vec2> normals = polygon_edge_normals(poly);

  Vec2 lo = poly[0], hi = poly[0];
  for (const Vec2& v : poly) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  int ix0, iy0, ix1, iy1;
  grid.world_to_cell(lo, ix0, iy0);
  grid.world_to_cell(hi, ix1, iy1);
  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      if (!grid.in_bounds(ix, iy) || grid.occupied(ix, iy)) {
        const Vec2 cell_min = grid.origin + Vec2(ix * grid.resolution,
                                                 iy * grid.resolution);
        const Vec2 cell_max =
            cell_min + Vec2(grid.resolution, grid.resolution);
        if (convex_polygon_intersects_aabb(poly, normals, cell_min, cell_max))
          return true;
      }
    }
  }
  return false;
}

}  // namespace barnsim
