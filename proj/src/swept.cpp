#include "barnsim/swept.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace barnsim {

Polygon densify_closed(const Polygon& poly, Scalar d_sample) {
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const Scalar len = (b - a).norm();
    const int steps = std::max(1, static_cast<int>(std::ceil(len / d_sample)));
    for (int s = 0; s < steps; ++s) {
      out.push_back(a + (static_cast<Scalar>(s) / steps) * (b - a));
    }
  }
  return out;
}

Polygon convex_hull(std::vector<Vec2> points) {
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Vec2& a, const Vec2& b) {
                             return a.x() == b.x() && a.y() == b.y();
                           }),
               points.end());
  const std::size_t n = points.size();
  if (n < 3) return points;
  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) -
           (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower chain
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
    hull[k++] = points[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {  // upper chain
    while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

namespace {

Polygon mirror_x_axis(const Polygon& poly) {
  // Mirror across the x axis and reverse so the result stays CCW.
  Polygon out;
  out.reserve(poly.size());
  for (auto it = poly.rbegin(); it != poly.rend(); ++it)
    out.emplace_back(it->x(), -it->y());
  return out;
}

// Bitwise equality of two CCW vertex cycles up to rotation.
bool same_cycle(const Polygon& a, const Polygon& b) {
  const std::size_t n = a.size();
  if (b.size() != n) return false;
  for (std::size_t offset = 0; offset < n; ++offset) {
    bool match = true;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& va = a[i];
      const Vec2& vb = b[(i + offset) % n];
      if (va.x() != vb.x() || va.y() != vb.y()) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

// Intersection interval [t_near, t_far] of the ray center + t * dir with a
// convex polygon. Returns false when the ray misses.
bool ray_polygon_interval(const Polygon& poly, const Vec2& center,
                          const Vec2& dir, Scalar& t_near, Scalar& t_far) {
  t_near = std::numeric_limits<Scalar>::infinity();
  t_far = -std::numeric_limits<Scalar>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const Vec2 e = b - a;
    const Scalar denom = dir.x() * e.y() - dir.y() * e.x();
    if (std::abs(denom) < 1e-14) continue;
    const Vec2 d = a - center;
    const Scalar t = (d.x() * e.y() - d.y() * e.x()) / denom;
    const Scalar s = (d.x() * dir.y() - d.y() * dir.x()) / denom;
    if (s < -1e-12 || s > 1.0 + 1e-12) continue;
    t_near = std::min(t_near, t);
    t_far = std::max(t_far, t);
  }
  return t_far >= t_near && t_far > 0.0;
}

}  // namespace

Polygon swept_arc_boundary(const Polygon& poly, Scalar v, Scalar kappa,
                           Scalar horizon, Scalar d_sample) {
  if (poly.size() < 3) throw std::invalid_argument("swept: degenerate polygon");
  if (v <= 0.0 || horizon <= 0.0)
    throw std::invalid_argument("swept: v and horizon must be positive");
  if (d_sample <= 0.0) throw std::invalid_argument("swept: d_sample <= 0");

  const Scalar arc_len = v * horizon;

  if (std::abs(kappa) * arc_len < 1e-6) {
    // Straight sweep: Minkowski sum of the polygon with a segment.
    std::vector<Vec2> pts = poly;
    for (const Vec2& p : poly) pts.emplace_back(p.x() + arc_len, p.y());
    return densify_closed(convex_hull(std::move(pts)), d_sample);
  }

  if (kappa < 0.0) {  // right turn: mirror, sweep left, mirror back
    Polygon mirrored_poly = mirror_x_axis(poly);
    // A symmetric footprint uses the left-turn outline itself, so +/-kappa
    // tubes mirror each other bit for bit.
    const Polygon& basis = same_cycle(mirrored_poly, poly) ? poly
                                                           : mirrored_poly;
    return mirror_x_axis(
        swept_arc_boundary(basis, v, -kappa, horizon, d_sample));
  }

  const Scalar radius = 1.0 / kappa;
  const Vec2 center(0.0, radius);
  const Scalar alpha = kappa * arc_len;  // total heading change, CCW

  // The construction needs the turn center outside the footprint.
  if (polygon_contains(poly, center) ||
      polygon_boundary_distance(poly, center) < 1e-6) {
    throw std::invalid_argument(
        "swept: turn center inside footprint (curvature too tight)");
  }

  // Angular extent of the polygon as seen from the turn center. All
  // vertices lie strictly below the center, so bearings stay in (-pi, 0)
  // and need no unwrapping.
  Scalar psi_lo = std::numeric_limits<Scalar>::infinity();
  Scalar psi_hi = -std::numeric_limits<Scalar>::infinity();
  Scalar r_max = 0.0;
  for (const Vec2& p : poly) {
    const Vec2 d = p - center;
    psi_lo = std::min(psi_lo, std::atan2(d.y(), d.x()));
    psi_hi = std::max(psi_hi, std::atan2(d.y(), d.x()));
    r_max = std::max(r_max, d.norm());
  }
  if (psi_hi - psi_lo + alpha >= 2.0 * M_PI - 1e-6) {
    throw std::invalid_argument("swept: sweep self-overlaps (reduce heading "
                                "change or curvature)");
  }

  // Radial cross-sections of the footprint on a fine bearing grid.
  const Scalar dpsi = d_sample / (2.0 * r_max);
  const int n_u = std::max(2, static_cast<int>(std::ceil((psi_hi - psi_lo) /
                                                         dpsi))) + 1;
  const Scalar du = (psi_hi - psi_lo) / (n_u - 1);
  std::vector<Scalar> near(n_u), far(n_u);
  for (int i = 0; i < n_u; ++i) {
    const Scalar u = psi_lo + i * du;
    const Vec2 dir(std::cos(u), std::sin(u));
    Scalar t0, t1;
    if (ray_polygon_interval(poly, center, dir, t0, t1)) {
      near[i] = std::max(t0, 0.0);
      far[i] = t1;
    } else {
      // Tangent grazing at the extremes: fall back to the closest vertex.
      Scalar best = r_max;
      for (const Vec2& p : poly) {
        const Vec2 d = p - center;
        const Scalar bearing = std::atan2(d.y(), d.x());
        if (std::abs(bearing - u) < 2.0 * du) best = std::min(best, d.norm());
      }
      near[i] = far[i] = best;
    }
  }

  // Swept cross-section at bearing psi_j = psi_lo + j * du is the min/max
  // over footprint cross-sections in the window [psi_j - alpha, psi_j].
  const int shift = static_cast<int>(std::lround(alpha / du));
  const int n_psi = n_u + shift;
  std::vector<Scalar> inner(n_psi), outer(n_psi);
  std::deque<int> max_q, min_q;
  for (int j = 0; j < n_psi; ++j) {
    const int u_new = std::min(j, n_u - 1);
    if (j == 0 || u_new > std::min(j - 1, n_u - 1)) {
      while (!max_q.empty() && far[max_q.back()] <= far[u_new])
        max_q.pop_back();
      max_q.push_back(u_new);
      while (!min_q.empty() && near[min_q.back()] >= near[u_new])
        min_q.pop_back();
      min_q.push_back(u_new);
    }
    const int window_lo = std::max(0, j - shift);
    while (max_q.front() < window_lo) max_q.pop_front();
    while (min_q.front() < window_lo) min_q.pop_front();
    outer[j] = far[max_q.front()];
    inner[j] = near[min_q.front()];
  }

  // Assemble the loop: outer curve forward, end cap, inner curve backward,
  // start cap; then enforce the sample spacing.
  Polygon loop;
  loop.reserve(2 * n_psi + 8);
  auto polar = [&](int j, Scalar r) {
    const Scalar psi = psi_lo + j * du;
    return Vec2(center.x() + r * std::cos(psi),
                center.y() + r * std::sin(psi));
  };
  for (int j = 0; j < n_psi; ++j) loop.push_back(polar(j, outer[j]));
  for (int j = n_psi - 1; j >= 0; --j) loop.push_back(polar(j, inner[j]));

  if (polygon_signed_area(loop) < 0.0)
    std::reverse(loop.begin(), loop.end());
  return densify_closed(loop, d_sample);
}

}  // namespace barnsim
