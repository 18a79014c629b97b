#ifndef ANCKIT_TESTS_HELPERS_HPP
#define ANCKIT_TESTS_HELPERS_HPP

#include <random>
#include <vector>

#include "anckit/geometry.hpp"
#include "anckit/types.hpp"
#include "anckit/uncertainty.hpp"

namespace testutil {

using anckit::cplx;

inline std::vector<cplx> random_points(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<cplx> pts(n);
    for (auto& p : pts) p = cplx(u(rng), u(rng));
    return pts;
}

// random bin geometry of the requested kind, fitted around a random cloud
inline anckit::uncertainty::BinGeometry random_geometry(std::mt19937_64& rng,
                                                        anckit::uncertainty::ModelKind kind,
                                                        double scale = 1.0) {
    using anckit::uncertainty::ModelKind;
    namespace geo = anckit::geometry;
    std::uniform_int_distribution<std::size_t> nd(4, 12);
    std::uniform_real_distribution<double> offs(-2.0, 2.0);
    const cplx center(offs(rng), offs(rng));
    auto pts = random_points(rng, nd(rng), scale);
    for (auto& p : pts) p += center;
    switch (kind) {
        case ModelKind::norm_bounded: return geo::smallest_circle(pts);
        case ModelKind::multi_disk: return geo::fit_multi_disk(pts, 3);
        case ModelKind::elliptic: return geo::min_area_ellipse(pts);
        case ModelKind::convex_hull: return geo::convex_hull(pts);
    }
    return geo::smallest_circle(pts);
}

}  // namespace testutil

#endif
