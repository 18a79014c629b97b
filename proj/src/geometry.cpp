#include "anckit/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>

namespace anckit::geometry {

namespace {

constexpr double kCollinearFloor = 1e-6;

double cross(cplx o, cplx a, cplx b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) -
           (a.imag() - o.imag()) * (b.real() - o.real());
}

Disk circle_two(cplx a, cplx b) {
    return Disk{0.5 * (a + b), 0.5 * std::abs(a - b)};
}

// Circumcircle of three points; falls back to the two-point diameter disk
// when the triangle is (near) degenerate.
Disk circle_three(cplx a, cplx b, cplx c) {
    const double d = 2.0 * cross(a, b, c);
    const double scale = std::max({std::abs(b - a), std::abs(c - a), std::abs(c - b)});
    if (std::abs(d) <= 1e-14 * scale * scale) {
        Disk best = circle_two(a, b);
        for (const Disk& cand : {circle_two(a, c), circle_two(b, c)})
            if (cand.radius > best.radius) best = cand;
        return best;
    }
    const double a2 = std::norm(a), b2 = std::norm(b), c2 = std::norm(c);
    const double ux = (a2 * (b.imag() - c.imag()) + b2 * (c.imag() - a.imag()) +
                       c2 * (a.imag() - b.imag())) / d;
    const double uy = (a2 * (c.real() - b.real()) + b2 * (a.real() - c.real()) +
                       c2 * (b.real() - a.real())) / d;
    const cplx center(ux, uy);
    return Disk{center, std::abs(a - center)};
}

Disk trivial_circle(const std::vector<cplx>& support) {
    switch (support.size()) {
        case 0: return Disk{0.0, 0.0};
        case 1: return Disk{support[0], 0.0};
        case 2: return circle_two(support[0], support[1]);
        default: {
            // the minimal disk of 3 points may be a two-point diameter disk
            for (std::size_t i = 0; i < 3; ++i) {
                const Disk d = circle_two(support[i % 3], support[(i + 1) % 3]);
                if (contains(d, support[(i + 2) % 3], 1e-12 * (1.0 + d.radius))) return d;
            }
            return circle_three(support[0], support[1], support[2]);
        }
    }
}

Disk welzl(std::vector<cplx>& pts, std::size_t n, std::vector<cplx>& support) {
    if (n == 0 || support.size() == 3) return trivial_circle(support);
    Disk d = welzl(pts, n - 1, support);
    const cplx p = pts[n - 1];
    if (contains(d, p, 1e-12 * (1.0 + d.radius))) return d;
    support.push_back(p);
    d = welzl(pts, n - 1, support);
    support.pop_back();
    return d;
}

double wrap_angle_pi(double theta) {
    theta = std::fmod(theta, M_PI);
    if (theta < 0.0) theta += M_PI;
    return theta;
}

}  // namespace

double spread(const std::vector<cplx>& points) {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            s = std::max(s, std::abs(points[i] - points[j]));
    return s;
}

Disk smallest_circle(const std::vector<cplx>& points) {
    if (points.empty()) throw config_error("smallest_circle needs at least one point");
    for (cplx p : points)
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
            throw config_error("smallest_circle: non-finite point");
    std::vector<cplx> pts = points;
    std::mt19937 rng(0x5C1Eu);  // fixed shuffle seed, deterministic result
    std::shuffle(pts.begin(), pts.end(), rng);
    std::vector<cplx> support;
    return welzl(pts, pts.size(), support);
}

Ellipse min_area_ellipse(const std::vector<cplx>& points, double tol) {
    if (points.size() < 1) throw config_error("min_area_ellipse needs points");
    if (tol <= 0.0) throw config_error("min_area_ellipse tol must be positive");

    const double sp = spread(points);
    const double b_min = std::max(kCollinearFloor * sp, 1e-300);
    if (sp == 0.0) {
        // single distinct point: degeneracy floor disk
        const double r = std::max(1e-12, 1e-12 * std::abs(points[0]));
        return Ellipse{points[0], r, r, 0.0};
    }

    const std::size_t n = points.size();
    std::vector<double> u(n, 1.0 / static_cast<double>(n));

    // Khachiyan iteration on lifted points q_i = (x_i, y_i, 1)
    const std::size_t max_iter = 10000;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // M = sum u_i q_i q_i^T (symmetric 3x3)
        double m00 = 0, m01 = 0, m02 = 0, m11 = 0, m12 = 0, m22 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = points[i].real(), y = points[i].imag(), w = u[i];
            m00 += w * x * x;
            m01 += w * x * y;
            m02 += w * x;
            m11 += w * y * y;
            m12 += w * y;
            m22 += w;
        }
        const double det = m00 * (m11 * m22 - m12 * m12) - m01 * (m01 * m22 - m12 * m02) +
                           m02 * (m01 * m12 - m11 * m02);
        if (std::abs(det) < 1e-30) break;  // collinear data, handled below
        // inverse via adjugate
        const double i00 = (m11 * m22 - m12 * m12) / det;
        const double i01 = (m02 * m12 - m01 * m22) / det;
        const double i02 = (m01 * m12 - m02 * m11) / det;
        const double i11 = (m00 * m22 - m02 * m02) / det;
        const double i12 = (m01 * m02 - m00 * m12) / det;
        const double i22 = (m00 * m11 - m01 * m01) / det;

        double kappa = 0.0;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = points[i].real(), y = points[i].imag();
            const double w = x * (i00 * x + i01 * y + i02) + y * (i01 * x + i11 * y + i12) +
                             (i02 * x + i12 * y + i22);
            if (w > kappa) {
                kappa = w;
                arg = i;
            }
        }
        if (kappa <= 3.0 * (1.0 + tol)) break;
        const double step = (kappa - 3.0) / (3.0 * (kappa - 1.0));
        for (std::size_t i = 0; i < n; ++i) u[i] *= (1.0 - step);
        u[arg] += step;
    }

    // center and scatter S = sum u_i p_i p_i^T - c c^T
    double cx = 0, cy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cx += u[i] * points[i].real();
        cy += u[i] * points[i].imag();
    }
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = points[i].real() - cx, dy = points[i].imag() - cy;
        sxx += u[i] * dx * dx;
        sxy += u[i] * dx * dy;
        syy += u[i] * dy * dy;
    }

    // eigen-decomposition of the symmetric 2x2 scatter
    const double tr = sxx + syy;
    const double diff = sxx - syy;
    const double disc = std::sqrt(diff * diff + 4.0 * sxy * sxy);
    const double l1 = 0.5 * (tr + disc);  // major direction
    const double l2 = 0.5 * (tr - disc);
    double theta;
    if (disc < 1e-300)
        theta = 0.0;
    else
        theta = 0.5 * std::atan2(2.0 * sxy, diff);

    // {x : (x-c)^T (2 S)^{-1} (x-c) <= 1} => semi-axes sqrt(2 lambda)
    double a = std::sqrt(std::max(2.0 * l1, 0.0));
    double b = std::sqrt(std::max(2.0 * l2, 0.0));
    a = std::max(a, b_min);
    b = std::max(b, b_min);

    Ellipse e{cplx(cx, cy), a, b, wrap_angle_pi(theta)};

    // enforce exact enclosure: inflate both axes by the worst quadratic-form
    // excess (Khachiyan converges to within (1+tol) only)
    double worst = 0.0;
    const double ct = std::cos(e.angle), st = std::sin(e.angle);
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = points[i].real() - cx, dy = points[i].imag() - cy;
        const double xa = ct * dx + st * dy;
        const double xb = st * dx - ct * dy;
        worst = std::max(worst, (xa / a) * (xa / a) + (xb / b) * (xb / b));
    }
    if (worst > 1.0) {
        const double s = std::sqrt(worst);
        e.semi_major *= s;
        e.semi_minor *= s;
    }
    return e;
}

ConvexHull2D convex_hull(const std::vector<cplx>& points) {
    if (points.size() < 1) throw config_error("convex_hull needs points");
    std::vector<cplx> pts = points;
    std::sort(pts.begin(), pts.end(), [](cplx a, cplx b) {
        return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    const double sp = spread(points);
    std::vector<cplx> hull;
    if (pts.size() >= 3) {
        const double eps = 1e-12 * std::max(sp * sp, 1e-300);
        std::vector<cplx> lower, upper;
        for (cplx p : pts) {
            while (lower.size() >= 2 && cross(lower[lower.size() - 2], lower.back(), p) <= eps)
                lower.pop_back();
            lower.push_back(p);
        }
        for (std::size_t i = pts.size(); i-- > 0;) {
            const cplx p = pts[i];
            while (upper.size() >= 2 && cross(upper[upper.size() - 2], upper.back(), p) <= eps)
                upper.pop_back();
            upper.push_back(p);
        }
        lower.pop_back();
        upper.pop_back();
        hull = lower;
        hull.insert(hull.end(), upper.begin(), upper.end());
    }

    if (hull.size() < 3) {
        // collinear (or fewer than 3 distinct points): inflate perpendicular
        // to the principal direction and return the resulting quadrilateral
        if (sp == 0.0) throw config_error("convex_hull: all points coincide");
        cplx pa = pts.front(), pb = pts.front();
        for (cplx p : pts)
            for (cplx q : pts)
                if (std::abs(p - q) > std::abs(pa - pb)) {
                    pa = p;
                    pb = q;
                }
        const cplx dir = (pb - pa) / std::abs(pb - pa);
        const cplx perp = dir * cplx(0.0, 1.0) * (kCollinearFloor * sp);
        hull = {pa - perp, pb - perp, pb + perp, pa + perp};
        if (cross(hull[0], hull[1], hull[2]) < 0.0)
            std::reverse(hull.begin(), hull.end());
    }

    ConvexHull2D out;
    out.vertices = hull;
    const std::size_t H = hull.size();
    out.halfspaces.resize(H);
    for (std::size_t m = 0; m < H; ++m) {
        const cplx v0 = hull[m], v1 = hull[(m + 1) % H];
        const cplx d = v1 - v0;
        const double len = std::abs(d);
        // CCW polygon: outward normal of edge (v0, v1) is (dy, -dx)/len
        const double nx = d.imag() / len, ny = -d.real() / len;
        out.halfspaces[m].angle = std::atan2(ny, nx);
        out.halfspaces[m].offset = -(nx * v0.real() + ny * v0.imag());
    }
    return out;
}

MultiDisk fit_multi_disk(const std::vector<cplx>& points, std::size_t num_disks) {
    if (points.empty()) throw config_error("fit_multi_disk needs points");
    if (num_disks < 1) throw config_error("fit_multi_disk needs D >= 1");
    if (num_disks > points.size()) {
        std::cerr << "fit_multi_disk: D=" << num_disks << " exceeds point count "
                  << points.size() << ", clamping\n";
        num_disks = points.size();
    }
    cplx anchor = std::accumulate(points.begin(), points.end(), cplx(0.0)) /
                  static_cast<double>(points.size());

    MultiDisk md;
    md.anchor = anchor;
    if (num_disks == 1) {
        std::vector<cplx> all = points;
        all.push_back(anchor);
        md.disks.push_back(smallest_circle(all));
        return md;
    }

    std::vector<std::size_t> idx(points.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::arg(points[a] - anchor) < std::arg(points[b] - anchor);
    });

    const std::size_t M = points.size();
    for (std::size_t i = 0; i < num_disks; ++i) {
        const std::size_t lo = i * M / num_disks;
        const std::size_t hi = (i + 1) * M / num_disks;
        std::vector<cplx> cluster;
        cluster.reserve(hi - lo + 1);
        for (std::size_t j = lo; j < hi; ++j) cluster.push_back(points[idx[j]]);
        cluster.push_back(anchor);
        md.disks.push_back(smallest_circle(cluster));
    }
    return md;
}

double area(const Disk& d) { return M_PI * d.radius * d.radius; }

double area(const Ellipse& e) { return M_PI * e.semi_major * e.semi_minor; }

double area(const ConvexHull2D& h) {
    double acc = 0.0;
    const std::size_t n = h.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = h.vertices[i], b = h.vertices[(i + 1) % n];
        acc += a.real() * b.imag() - b.real() * a.imag();
    }
    return 0.5 * std::abs(acc);
}

double area(const MultiDisk& md, std::size_t resolution) {
    resolution = std::max<std::size_t>(resolution, 512);
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const Disk& d : md.disks) {
        x0 = std::min(x0, d.center.real() - d.radius);
        x1 = std::max(x1, d.center.real() + d.radius);
        y0 = std::min(y0, d.center.imag() - d.radius);
        y1 = std::max(y1, d.center.imag() + d.radius);
    }
    if (!(x1 > x0) || !(y1 > y0)) return 0.0;
    const double dx = (x1 - x0) / static_cast<double>(resolution);
    const double dy = (y1 - y0) / static_cast<double>(resolution);
    std::size_t count = 0;
    for (std::size_t iy = 0; iy < resolution; ++iy) {
        const double y = y0 + (static_cast<double>(iy) + 0.5) * dy;
        for (std::size_t ix = 0; ix < resolution; ++ix) {
            const double x = x0 + (static_cast<double>(ix) + 0.5) * dx;
            for (const Disk& d : md.disks) {
                const double rx = x - d.center.real(), ry = y - d.center.imag();
                if (rx * rx + ry * ry <= d.radius * d.radius) {
                    ++count;
                    break;
                }
            }
        }
    }
    return static_cast<double>(count) * dx * dy;
}

bool contains(const Disk& d, cplx p, double tol) {
    return std::abs(p - d.center) <= d.radius + tol;
}

bool contains(const MultiDisk& md, cplx p, double tol) {
    for (const Disk& d : md.disks)
        if (contains(d, p, tol)) return true;
    return false;
}

bool contains(const Ellipse& e, cplx p, double tol) {
    const cplx delta = p - e.center;
    const double ct = std::cos(e.angle), st = std::sin(e.angle);
    const double xa = ct * delta.real() + st * delta.imag();
    const double xb = st * delta.real() - ct * delta.imag();
    const double q = (xa / e.semi_major) * (xa / e.semi_major) +
                     (xb / e.semi_minor) * (xb / e.semi_minor);
    return q <= 1.0 + tol;
}

bool contains(const ConvexHull2D& h, cplx p, double tol) {
    for (const HalfSpace& hs : h.halfspaces) {
        const double v = std::cos(hs.angle) * p.real() + std::sin(hs.angle) * p.imag() +
                         hs.offset;
        if (v > tol) return false;
    }
    return true;
}

}  // namespace anckit::geometry
