#ifndef ANCKIT_CONSTRAINTS_HPP
#define ANCKIT_CONSTRAINTS_HPP

#include <vector>

#include "anckit/geometry.hpp"
#include "anckit/uncertainty.hpp"

namespace anckit::constraints {

/// Per-bin robust-stability constraint configuration. A constraint value
/// g < 0 certifies that the critical point -1 is excluded from the set of
/// open-loop responses at that bin.
struct ConstraintConfig {
    double sharpness = 50.0;   // smooth-min rho, applied after max-|psi| scaling
    double feas_margin = 1e-8;  // epsilon used by strict-feasibility checks
    bool convex_sufficient = false;  // disk/multi-disk: convex sufficient mode
    // relative inflation of the uncertainty sets applied by the optimizer:
    // per-bin exclusion is only enforced at grid frequencies, so designs are
    // run against sets grown by design_margin x (set size), which keeps the
    // closed loop stable between bins too
    double design_margin = 0.05;
};

/// g = |Q| r - |1 + Q (c - Ghat)|; g < 0 iff -1 is excluded from the
/// open-loop disk image. Reduces to |Q| r - 1 < 0 when c = Ghat.
double constraint_disk(cplx q_bin, const geometry::Disk& disk, cplx ghat_bin);

/// Convex sufficient variant |Q (c - Ghat)| + |Q| r - 1.
double constraint_disk_convex(cplx q_bin, const geometry::Disk& disk, cplx ghat_bin);

/// max over member disks (exclusion from a union requires exclusion from
/// every member).
double constraint_multi_disk(cplx q_bin, const geometry::MultiDisk& md, cplx ghat_bin,
                             bool convex_sufficient = false);

/// Elliptic constraint:
///   g = |Q|^4 - xi_a^2/a^2 - xi_b^2/b^2,
/// with eps = Q + |Q|^2 conj(center - Ghat),
///      xi_a = cos(th) Re(eps) - sin(th) Im(eps),
///      xi_b = sin(th) Re(eps) + cos(th) Im(eps).
/// g < 0 iff -1 lies strictly outside the transformed ellipse (Q != 0);
/// g(0) = 0 is a removable degeneracy, callers treat |Q| < 1e-12 as feasible.
double constraint_ellipse(cplx q_bin, const geometry::Ellipse& e, cplx ghat_bin);

/// Convex hull constraint, exact min form: with
///   beta = Q - |Q|^2 conj(Ghat),
///   psi_m = cos(phi_m) Re(beta) - sin(phi_m) Im(beta) - |Q|^2 b_m
/// (phi_m, b_m the stored half-space angle/offset; -1 is inside the
/// transformed hull iff all psi_m >= 0), g = min_m psi_m. Same removable
/// Q = 0 degeneracy as the ellipse.
double constraint_hull_exact(cplx q_bin, const geometry::ConvexHull2D& h, cplx ghat_bin);

/// Smoothed form -(1/rho') ln sum exp(-rho' psi_m) with the scale-adaptive
/// rho' = rho / max_m |psi_m|. Sandwich: g - ln(H)/rho' <= g_rho <= g.
double constraint_hull_smoothed(cplx q_bin, const geometry::ConvexHull2D& h, cplx ghat_bin,
                                double rho);

/// Constraint value for any bin geometry (hull uses the exact min form
/// unless smoothed is requested).
double constraint_value(cplx q_bin, const uncertainty::BinGeometry& model, cplx ghat_bin,
                        const ConstraintConfig& config, bool smoothed_hull = false);

/// Analytic gradient of the bin-k constraint with respect to the FIR
/// coefficient vector w, through Q_k = sum_n w_n e^{-j n omega_k}. The hull
/// kind differentiates the smoothed form (including the adaptive-rho' chain
/// term).
std::vector<double> constraint_gradient(const std::vector<double>& w, double omega_k,
                                        const uncertainty::BinGeometry& model, cplx ghat_bin,
                                        const ConstraintConfig& config);

/// dg/dw_n = Re(coef * e^{-j n omega_k}): single complex phasor coefficient
/// representing the whole gradient at one bin.
cplx constraint_gradient_phasor(cplx q_bin, const uncertainty::BinGeometry& model,
                                cplx ghat_bin, const ConstraintConfig& config);

struct ExclusionVerdict {
    bool excluded = false;
    double margin = 0.0;  // min over boundary samples of |1 + Q (G - Ghat)|
};

/// Independent geometric oracle: samples the model boundary densely and tests
/// whether -1 lies inside the transformed set (via the critical pre-image
/// Ghat - 1/Q). Q = 0 reports excluded with margin 1.
ExclusionVerdict exclusion_oracle(cplx q_bin, const uncertainty::BinGeometry& model,
                                  cplx ghat_bin, std::size_t samples = 512);

/// Boundary sample points of a bin geometry (circle/ellipse parameterization,
/// hull edges, multi-disk union arcs).
std::vector<cplx> boundary_samples(const uncertainty::BinGeometry& model, std::size_t samples);

/// Feasibility verdict honoring the removable Q = 0 degeneracy of the
/// elliptic/hull forms.
bool is_feasible(cplx q_bin, const uncertainty::BinGeometry& model, cplx ghat_bin,
                 const ConstraintConfig& config);

}  // namespace anckit::constraints

#endif
