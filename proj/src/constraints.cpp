#include "anckit/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace anckit::constraints {

using geometry::ConvexHull2D;
using geometry::Disk;
using geometry::Ellipse;
using geometry::MultiDisk;
using uncertainty::BinGeometry;

namespace {

constexpr double kTinyQ = 1e-12;

struct HullPsis {
    std::vector<double> psi;
    double max_abs = 0.0;
};

HullPsis hull_psis(cplx q, const ConvexHull2D& h, cplx ghat) {
    const cplx beta = q - std::norm(q) * std::conj(ghat);
    HullPsis out;
    out.psi.reserve(h.halfspaces.size());
    for (const auto& hs : h.halfspaces) {
        const double p = std::cos(hs.angle) * beta.real() - std::sin(hs.angle) * beta.imag() -
                         std::norm(q) * hs.offset;
        out.psi.push_back(p);
        out.max_abs = std::max(out.max_abs, std::abs(p));
    }
    return out;
}

}  // namespace

double constraint_disk(cplx q, const Disk& disk, cplx ghat) {
    return std::abs(q) * disk.radius - std::abs(1.0 + q * (disk.center - ghat));
}

double constraint_disk_convex(cplx q, const Disk& disk, cplx ghat) {
    return std::abs(q * (disk.center - ghat)) + std::abs(q) * disk.radius - 1.0;
}

double constraint_multi_disk(cplx q, const MultiDisk& md, cplx ghat, bool convex_sufficient) {
    double g = -std::numeric_limits<double>::infinity();
    for (const Disk& d : md.disks) {
        const double gi =
            convex_sufficient ? constraint_disk_convex(q, d, ghat) : constraint_disk(q, d, ghat);
        g = std::max(g, gi);
    }
    return g;
}

double constraint_ellipse(cplx q, const Ellipse& e, cplx ghat) {
    const cplx eps = q + std::norm(q) * std::conj(e.center - ghat);
    const double ct = std::cos(e.angle), st = std::sin(e.angle);
    const double xa = ct * eps.real() - st * eps.imag();
    const double xb = st * eps.real() + ct * eps.imag();
    const double q2 = std::norm(q);
    return q2 * q2 - (xa / e.semi_major) * (xa / e.semi_major) -
           (xb / e.semi_minor) * (xb / e.semi_minor);
}

double constraint_hull_exact(cplx q, const ConvexHull2D& h, cplx ghat) {
    const HullPsis p = hull_psis(q, h, ghat);
    return *std::min_element(p.psi.begin(), p.psi.end());
}

double constraint_hull_smoothed(cplx q, const ConvexHull2D& h, cplx ghat, double rho) {
    if (rho <= 0.0) throw config_error("smooth-min sharpness must be positive");
    const HullPsis p = hull_psis(q, h, ghat);
    const double scale = p.max_abs > 0.0 ? p.max_abs : 1.0;
    const double rho_eff = rho / scale;
    const double psi_min = *std::min_element(p.psi.begin(), p.psi.end());
    double acc = 0.0;
    for (double v : p.psi) acc += std::exp(-rho_eff * (v - psi_min));
    return psi_min - std::log(acc) / rho_eff;
}

double constraint_value(cplx q, const BinGeometry& model, cplx ghat,
                        const ConstraintConfig& config, bool smoothed_hull) {
    return std::visit(
        [&](const auto& g) -> double {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Disk>) {
                return config.convex_sufficient ? constraint_disk_convex(q, g, ghat)
                                                : constraint_disk(q, g, ghat);
            } else if constexpr (std::is_same_v<T, MultiDisk>) {
                return constraint_multi_disk(q, g, ghat, config.convex_sufficient);
            } else if constexpr (std::is_same_v<T, Ellipse>) {
                return constraint_ellipse(q, g, ghat);
            } else {
                return smoothed_hull ? constraint_hull_smoothed(q, g, ghat, config.sharpness)
                                     : constraint_hull_exact(q, g, ghat);
            }
        },
        model);
}

cplx constraint_gradient_phasor(cplx q, const BinGeometry& model, cplx ghat,
                                const ConstraintConfig& config) {
    return std::visit(
        [&](const auto& g) -> cplx {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Disk>) {
                const double aq = std::abs(q);
                if (config.convex_sufficient) {
                    if (aq < kTinyQ) return cplx(0.0);
                    const cplx d = g.center - ghat;
                    return (std::abs(d) + g.radius) * std::conj(q) / aq;
                }
                const cplx d = g.center - ghat;
                const cplx A = 1.0 + q * d;
                const double aA = std::abs(A);
                cplx coef = 0.0;
                if (aq >= kTinyQ) coef += g.radius * std::conj(q) / aq;
                if (aA >= kTinyQ) coef -= std::conj(A) * d / aA;
                return coef;
            } else if constexpr (std::is_same_v<T, MultiDisk>) {
                // gradient of the active (max) member disk
                std::size_t arg = 0;
                double best = -std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < g.disks.size(); ++i) {
                    const double gi = config.convex_sufficient
                                          ? constraint_disk_convex(q, g.disks[i], ghat)
                                          : constraint_disk(q, g.disks[i], ghat);
                    if (gi > best) {
                        best = gi;
                        arg = i;
                    }
                }
                return constraint_gradient_phasor(q, BinGeometry{g.disks[arg]}, ghat, config);
            } else if constexpr (std::is_same_v<T, Ellipse>) {
                const cplx mbar = std::conj(g.center - ghat);
                const cplx eps = q + std::norm(q) * mbar;
                const cplx rot = std::polar(1.0, g.angle);
                const double xa = (rot * eps).real();
                const double xb = (rot * eps).imag();
                const double a2 = g.semi_major * g.semi_major;
                const double b2 = g.semi_minor * g.semi_minor;
                // d|Q|^4 term
                cplx coef = 4.0 * std::norm(q) * std::conj(q);
                // d(xa^2/a^2 + xb^2/b^2): d eps = z + 2 Re(conj(Q) z) mbar
                coef -= (2.0 * xa / a2) * rot;
                coef -= (2.0 * xb / b2) * (cplx(0.0, -1.0) * rot);
                const double via_q = (4.0 * xa / a2) * (rot * mbar).real() +
                                     (4.0 * xb / b2) * (rot * mbar).imag();
                coef -= via_q * std::conj(q);
                return coef;
            } else {
                // smoothed min over half-spaces, including the adaptive-rho'
                // chain through max_m |psi_m|
                const HullPsis p = hull_psis(q, g, ghat);
                const std::size_t H = p.psi.size();
                const double scale = p.max_abs > 0.0 ? p.max_abs : 1.0;
                const double rho_eff = config.sharpness / scale;
                const double psi_min = *std::min_element(p.psi.begin(), p.psi.end());
                double acc = 0.0;
                std::vector<double> lam(H);
                for (std::size_t m = 0; m < H; ++m) {
                    lam[m] = std::exp(-rho_eff * (p.psi[m] - psi_min));
                    acc += lam[m];
                }
                for (double& l : lam) l /= acc;
                const double g_rho = psi_min - std::log(acc) / rho_eff;

                auto psi_phasor = [&](std::size_t m) -> cplx {
                    const double phi = g.halfspaces[m].angle;
                    const cplx ephi = std::polar(1.0, phi);
                    return ephi - 2.0 * ((ephi * std::conj(ghat)).real() +
                                         g.halfspaces[m].offset) *
                                      std::conj(q);
                };

                cplx coef = 0.0;
                double lam_psi = 0.0;
                for (std::size_t m = 0; m < H; ++m) {
                    coef += lam[m] * psi_phasor(m);
                    lam_psi += lam[m] * p.psi[m];
                }
                if (p.max_abs > 0.0) {
                    // d rho_eff = -(rho / max|psi|^2) sign(psi_mstar) d psi_mstar
                    std::size_t mstar = 0;
                    for (std::size_t m = 1; m < H; ++m)
                        if (std::abs(p.psi[m]) > std::abs(p.psi[mstar])) mstar = m;
                    const double dg_drho = (lam_psi - g_rho) / rho_eff;
                    const double drho_scale = -(config.sharpness / (p.max_abs * p.max_abs)) *
                                              (p.psi[mstar] >= 0.0 ? 1.0 : -1.0);
                    coef += dg_drho * drho_scale * psi_phasor(mstar);
                }
                return coef;
            }
        },
        model);
}

std::vector<double> constraint_gradient(const std::vector<double>& w, double omega_k,
                                        const BinGeometry& model, cplx ghat,
                                        const ConstraintConfig& config) {
    cplx q = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n)
        q += w[n] * std::polar(1.0, -static_cast<double>(n) * omega_k);
    const cplx coef = constraint_gradient_phasor(q, model, ghat, config);
    std::vector<double> grad(w.size());
    for (std::size_t n = 0; n < w.size(); ++n)
        grad[n] = (coef * std::polar(1.0, -static_cast<double>(n) * omega_k)).real();
    return grad;
}

std::vector<cplx> boundary_samples(const BinGeometry& model, std::size_t samples) {
    samples = std::max<std::size_t>(samples, 16);
    return std::visit(
        [&](const auto& g) -> std::vector<cplx> {
            using T = std::decay_t<decltype(g)>;
            std::vector<cplx> out;
            if constexpr (std::is_same_v<T, Disk>) {
                out.reserve(samples);
                for (std::size_t i = 0; i < samples; ++i)
                    out.push_back(g.center + std::polar(g.radius,
                                                        2.0 * M_PI * static_cast<double>(i) /
                                                            static_cast<double>(samples)));
            } else if constexpr (std::is_same_v<T, MultiDisk>) {
                // arcs of each circle not strictly interior to another disk
                for (std::size_t d = 0; d < g.disks.size(); ++d) {
                    for (std::size_t i = 0; i < samples; ++i) {
                        const cplx p = g.disks[d].center +
                                       std::polar(g.disks[d].radius,
                                                  2.0 * M_PI * static_cast<double>(i) /
                                                      static_cast<double>(samples));
                        bool interior = false;
                        for (std::size_t o = 0; o < g.disks.size() && !interior; ++o)
                            if (o != d &&
                                std::abs(p - g.disks[o].center) <
                                    g.disks[o].radius * (1.0 - 1e-12))
                                interior = true;
                        if (!interior) out.push_back(p);
                    }
                }
            } else if constexpr (std::is_same_v<T, Ellipse>) {
                const cplx rot = std::polar(1.0, g.angle);
                out.reserve(samples);
                for (std::size_t i = 0; i < samples; ++i) {
                    const double t = 2.0 * M_PI * static_cast<double>(i) /
                                     static_cast<double>(samples);
                    out.push_back(g.center + rot * cplx(g.semi_major * std::cos(t),
                                                        g.semi_minor * std::sin(t)));
                }
            } else {
                const std::size_t H = g.vertices.size();
                const std::size_t per_edge = std::max<std::size_t>(samples / H, 2);
                for (std::size_t m = 0; m < H; ++m) {
                    const cplx v0 = g.vertices[m], v1 = g.vertices[(m + 1) % H];
                    for (std::size_t i = 0; i < per_edge; ++i) {
                        const double t = static_cast<double>(i) / static_cast<double>(per_edge);
                        out.push_back(v0 + t * (v1 - v0));
                    }
                }
            }
            return out;
        },
        model);
}

ExclusionVerdict exclusion_oracle(cplx q, const BinGeometry& model, cplx ghat,
                                  std::size_t samples) {
    if (samples < 256) samples = 256;
    ExclusionVerdict v;
    if (std::abs(q) < kTinyQ) {
        v.excluded = true;
        v.margin = 1.0;
        return v;
    }
    // -1 in C*G  <=>  exists G in the set with 1 + Q (G - Ghat) = 0
    //            <=>  the critical pre-image Ghat - 1/Q lies in the set
    const cplx preimage = ghat - 1.0 / q;
    v.excluded = !uncertainty::contains(model, preimage);
    v.margin = std::numeric_limits<double>::infinity();
    for (cplx p : boundary_samples(model, samples))
        v.margin = std::min(v.margin, std::abs(1.0 + q * (p - ghat)));
    return v;
}

bool is_feasible(cplx q, const BinGeometry& model, cplx ghat, const ConstraintConfig& config) {
    const bool degenerate_kind = std::holds_alternative<Ellipse>(model) ||
                                 std::holds_alternative<ConvexHull2D>(model);
    if (degenerate_kind && std::abs(q) < kTinyQ) return true;  // removable origin root
    return constraint_value(q, model, ghat, config, false) < config.feas_margin;
}

}  // namespace anckit::constraints
