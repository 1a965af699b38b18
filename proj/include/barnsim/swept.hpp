#ifndef BARNSIM_SWEPT_HPP
#define BARNSIM_SWEPT_HPP

#include "barnsim/geometry.hpp"

namespace barnsim {

// Ordered closed outline (CCW) of the area swept by a convex CCW polygon
// that follows a constant-curvature arc from the origin: curvature `kappa`
// at forward speed `v` for `horizon` seconds. Consecutive outline points
// are at most `d_sample` apart.
//
// For kappa = 0 this is the convex hull of the start and end footprints.
// For kappa != 0 the outline is computed in polar coordinates about the
// turn center: the swept region's radial cross-section at bearing psi is
// [min, max] over a sliding window of the footprint's own cross-sections,
// which is exact for convex footprints. Requires the turn center to lie
// strictly outside the polygon and the total angular extent (heading
// change + footprint angular width) to stay below 2*pi.
Polygon swept_arc_boundary(const Polygon& poly, Scalar v, Scalar kappa,
                           Scalar horizon, Scalar d_sample);

// Closed polygon densified so consecutive vertices are <= d_sample apart.
Polygon densify_closed(const Polygon& poly, Scalar d_sample);

Polygon convex_hull(std::vector<Vec2> points);

}  // namespace barnsim

#endif
