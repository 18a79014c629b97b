#ifndef ANCKIT_GEOMETRY_HPP
#define ANCKIT_GEOMETRY_HPP

#include <vector>

#include "anckit/types.hpp"

namespace anckit::geometry {

struct Disk {
    cplx center;
    double radius = 0.0;
};

/// Union of disks that all contain a shared anchor point, which keeps the
/// union contiguous.
struct MultiDisk {
    std::vector<Disk> disks;
    cplx anchor;
};

struct Ellipse {
    cplx center;
    double semi_major = 0.0;  // a >= b > 0
    double semi_minor = 0.0;
    double angle = 0.0;  // major axis vs real axis, stored in [0, pi)
};

/// Half-space in the angle/offset form used by the open-loop transformation:
///   interior = { p : cos(angle) Re(p) + sin(angle) Im(p) + offset <= 0 },
/// with (cos(angle), sin(angle)) the outward unit normal.
/// Multiplying the set by a complex C maps angle -> angle + arg(C) and
/// offset -> |C| * offset.
struct HalfSpace {
    double angle = 0.0;
    double offset = 0.0;
};

struct ConvexHull2D {
    std::vector<cplx> vertices;       // counterclockwise
    std::vector<HalfSpace> halfspaces;  // one per edge, same order
};

/// Minimal enclosing disk (Welzl, move-to-front, fixed shuffle seed).
Disk smallest_circle(const std::vector<cplx>& points);

/// Minimum-area enclosing ellipse via Khachiyan's MVEE iteration.
/// Near-collinear inputs get the minor axis clamped to 1e-6 * spread.
Ellipse min_area_ellipse(const std::vector<cplx>& points, double tol = 1e-7);

/// Convex hull (monotone chain), CCW vertices plus derived half-spaces.
/// Collinear inputs are inflated perpendicular to the line by 1e-6 * spread.
ConvexHull2D convex_hull(const std::vector<cplx>& points);

/// Shared-anchor multi-disk cover: anchor = mean of points, equal-count
/// angular partition into D clusters, per-cluster smallest circle including
/// the anchor. D = 1 reduces to smallest_circle(points + mean).
MultiDisk fit_multi_disk(const std::vector<cplx>& points, std::size_t num_disks);

double area(const Disk& d);
double area(const Ellipse& e);
double area(const ConvexHull2D& h);
/// Grid-sampled union area (>= 512x512 over the bounding box).
double area(const MultiDisk& md, std::size_t resolution = 512);

// Boundary-inclusive membership.
bool contains(const Disk& d, cplx p, double tol = 0.0);
bool contains(const MultiDisk& md, cplx p, double tol = 0.0);
bool contains(const Ellipse& e, cplx p, double tol = 0.0);
bool contains(const ConvexHull2D& h, cplx p, double tol = 0.0);

/// Max pairwise extent of a point set (used for degeneracy floors).
double spread(const std::vector<cplx>& points);

}  // namespace anckit::geometry

#endif
