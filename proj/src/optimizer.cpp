#include "anckit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <deque>
#include <limits>
#include <numeric>

#include "anckit/sigproc.hpp"

namespace anckit::optimizer {

using constraints::ConstraintConfig;
using geometry::ConvexHull2D;
using geometry::Disk;
using geometry::Ellipse;
using geometry::MultiDisk;
using uncertainty::BinGeometry;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTinyQ = 1e-12;

std::string fmt_line(const char* fmt, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, ap);
    va_end(ap);
    return buf;
}

// set size measure driving the relative design-margin inflation
double bin_size(const BinGeometry& b) {
    if (const auto* d = std::get_if<Disk>(&b)) return d->radius;
    if (const auto* md = std::get_if<MultiDisk>(&b)) {
        double r = 0.0;
        for (const Disk& d : md->disks) r = std::max(r, d.radius);
        return r;
    }
    if (const auto* e = std::get_if<Ellipse>(&b)) return e->semi_major;
    const auto& h = std::get<ConvexHull2D>(b);
    double s = 0.0;
    for (std::size_t i = 0; i < h.vertices.size(); ++i)
        for (std::size_t j = i + 1; j < h.vertices.size(); ++j)
            s = std::max(s, std::abs(h.vertices[i] - h.vertices[j]));
    return s / 2.0;
}

BinGeometry inflate_bin(const BinGeometry& b, double t) {
    if (t <= 0.0) return b;
    if (const auto* d = std::get_if<Disk>(&b)) return Disk{d->center, d->radius + t};
    if (const auto* md = std::get_if<MultiDisk>(&b)) {
        MultiDisk out = *md;
        for (Disk& d : out.disks) d.radius += t;
        return out;
    }
    if (const auto* e = std::get_if<Ellipse>(&b)) {
        Ellipse out = *e;
        out.semi_major += t;
        out.semi_minor += t;
        return out;
    }
    ConvexHull2D out = std::get<ConvexHull2D>(b);
    // outward offset of every face; vertices are not used by the solver
    for (geometry::HalfSpace& hs : out.halfspaces) hs.offset -= t;
    return out;
}

Disk merge_disks(const Disk& a, const Disk& b) {
    const double d = std::abs(a.center - b.center);
    if (d + b.radius <= a.radius) return a;
    if (d + a.radius <= b.radius) return b;
    const double r = (d + a.radius + b.radius) / 2.0;
    const cplx dir = d > 0.0 ? (b.center - a.center) / d : cplx(1.0);
    return Disk{a.center + dir * (r - a.radius), r};
}

Disk enclosing_disk(const BinGeometry& b) {
    if (const auto* d = std::get_if<Disk>(&b)) return *d;
    if (const auto* md = std::get_if<MultiDisk>(&b)) {
        Disk acc = md->disks.front();
        for (std::size_t i = 1; i < md->disks.size(); ++i) acc = merge_disks(acc, md->disks[i]);
        return acc;
    }
    if (const auto* e = std::get_if<Ellipse>(&b)) return Disk{e->center, e->semi_major};
    const auto& h = std::get<ConvexHull2D>(b);
    return geometry::smallest_circle(h.vertices);
}

// Conservative cover of two adjacent bins' sets, used for the midpoint guard
// constraints: the plant response between two grid frequencies is assumed to
// stay within a joint cover of the neighboring sets.
BinGeometry merge_bins(const BinGeometry& a, const BinGeometry& b) {
    const auto* ha = std::get_if<ConvexHull2D>(&a);
    const auto* hb = std::get_if<ConvexHull2D>(&b);
    if (ha && hb) {
        std::vector<cplx> pts = ha->vertices;
        pts.insert(pts.end(), hb->vertices.begin(), hb->vertices.end());
        return geometry::convex_hull(pts);
    }
    if (std::holds_alternative<Disk>(a) && std::holds_alternative<Disk>(b))
        return merge_disks(std::get<Disk>(a), std::get<Disk>(b));
    // ellipse / multi-disk neighbors: the hull of sampled boundaries is a far
    // tighter joint cover than merged enclosing disks (the sampling chord
    // error is well under the design-margin inflation applied on top)
    std::vector<cplx> pts = constraints::boundary_samples(a, 32);
    const std::vector<cplx> pb = constraints::boundary_samples(b, 32);
    pts.insert(pts.end(), pb.begin(), pb.end());
    return geometry::convex_hull(pts);
}

// One constraint row: a frequency, a (margin-inflated) set, and the index of
// the grid bin it reports as (-1 for midpoint/end guards).
struct CEntry {
    double omega = 0.0;
    BinGeometry set;
    long grid_bin = -1;
};

struct Problem {
    const DesignSpec& spec;
    std::size_t K, N, C;
    std::vector<cplx> ghat;          // internal model on the loss grid
    std::vector<double> w2;          // |W_k|^2
    std::vector<cplx> loss_rows;     // e^{-j n omega_k}, [k*N + n]
    std::vector<CEntry> entries;     // constraint rows (grid bins + guards)
    std::vector<cplx> cghat;         // internal model at constraint frequencies
    std::vector<cplx> cons_rows;     // phasors at constraint frequencies
    std::vector<double> hull_scale;  // frozen smooth-max scale per constraint
    double sharpness;

    explicit Problem(const DesignSpec& s) : spec(s) {
        K = s.grid.size();
        N = s.num_taps;
        ghat = s.internal_response();
        w2.resize(K);
        for (std::size_t k = 0; k < K; ++k)
            w2[k] = s.weight.magnitudes[k] * s.weight.magnitudes[k];

        auto fill_rows = [&](std::vector<cplx>& rows, const std::vector<double>& omegas) {
            rows.resize(omegas.size() * N);
            for (std::size_t k = 0; k < omegas.size(); ++k) {
                const cplx step = std::polar(1.0, -omegas[k]);
                cplx e = 1.0;
                for (std::size_t n = 0; n < N; ++n) {
                    rows[k * N + n] = e;
                    e *= step;
                }
            }
        };
        fill_rows(loss_rows, s.grid.bins);

        // constraint rows: every grid bin, every midpoint with a conservative
        // cover of its neighbors, and one guard beyond each end of the grid
        const double margin = s.constraint_config.design_margin;
        auto inflated = [&](const BinGeometry& b) {
            return inflate_bin(b, margin * bin_size(b));
        };
        std::vector<double> omegas;
        entries.push_back({s.grid.bins.front() / 2.0, inflated(s.model.bins.front()), -1});
        for (std::size_t k = 0; k < K; ++k) {
            entries.push_back({s.grid.bins[k], inflated(s.model.bins[k]), long(k)});
            if (k + 1 < K)
                entries.push_back({(s.grid.bins[k] + s.grid.bins[k + 1]) / 2.0,
                                   inflated(merge_bins(s.model.bins[k], s.model.bins[k + 1])),
                                   -1});
        }
        entries.push_back(
            {(s.grid.bins.back() + M_PI) / 2.0, inflated(s.model.bins.back()), -1});
        C = entries.size();
        for (const CEntry& e : entries) omegas.push_back(e.omega);
        fill_rows(cons_rows, omegas);
        cghat = sigproc::evaluate_coeffs(s.internal_model, omegas);
        hull_scale.assign(C, 1.0);
        sharpness = s.constraint_config.sharpness;
    }

    std::vector<cplx> eval_rows(const std::vector<double>& w, const std::vector<cplx>& rows,
                                std::size_t count) const {
        std::vector<cplx> q(count);
        for (std::size_t k = 0; k < count; ++k) {
            const cplx* row = &rows[k * N];
            double re = 0.0, im = 0.0;
            for (std::size_t n = 0; n < N; ++n) {
                re += w[n] * row[n].real();
                im += w[n] * row[n].imag();
            }
            q[k] = cplx(re, im);
        }
        return q;
    }

    std::vector<cplx> q_loss(const std::vector<double>& w) const {
        return eval_rows(w, loss_rows, K);
    }
    std::vector<cplx> q_cons(const std::vector<double>& w) const {
        return eval_rows(w, cons_rows, C);
    }

    void accumulate(std::vector<double>& grad, const std::vector<cplx>& rows, std::size_t k,
                    cplx coef) const {
        const cplx* row = &rows[k * N];
        const double cr = coef.real(), ci = coef.imag();
        for (std::size_t n = 0; n < N; ++n)
            grad[n] += cr * row[n].real() - ci * row[n].imag();
    }

    double loss(const std::vector<cplx>& q, std::vector<double>* grad) const {
        double L = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const cplx z = 1.0 - ghat[k] * q[k];
            L += w2[k] * std::norm(z);
            if (grad)
                accumulate(*grad, loss_rows, k, -2.0 * w2[k] * ghat[k] * std::conj(z) / double(K));
        }
        return L / double(K);
    }

    double barrier_disk(std::size_t c, cplx q, const Disk& d, double mu,
                        std::vector<double>* grad) const {
        const cplx gh = cghat[c];
        const double g = spec.constraint_config.convex_sufficient
                             ? constraints::constraint_disk_convex(q, d, gh)
                             : constraints::constraint_disk(q, d, gh);
        if (g >= 0.0) return kInf;
        if (grad) {
            const cplx coef = constraints::constraint_gradient_phasor(q, BinGeometry{d}, gh,
                                                                      spec.constraint_config);
            accumulate(*grad, cons_rows, c, mu * coef / (-g));
        }
        return -mu * std::log(-g);
    }

    // Barrier value/gradient for one constraint row. Returns +inf (and skips
    // the gradient) when the reformulated constraint is on the wrong side.
    double barrier_row(std::size_t c, cplx q, double mu, std::vector<double>* grad) const {
        const cplx gh = cghat[c];
        const BinGeometry& model = entries[c].set;
        if (const auto* d = std::get_if<Disk>(&model)) {
            return barrier_disk(c, q, *d, mu, grad);
        }
        if (const auto* md = std::get_if<MultiDisk>(&model)) {
            double acc = 0.0;
            for (const Disk& d : md->disks) {
                const double v = barrier_disk(c, q, d, mu, grad);
                if (v == kInf) return kInf;
                acc += v;
            }
            return acc;
        }
        if (const auto* e = std::get_if<Ellipse>(&model)) {
            // fractional form |Q|^4 / Sigma - 1: same sign as the quartic
            // constraint but bounded near the removable Q = 0 root
            const cplx mbar = std::conj(e->center - gh);
            const cplx eps = q + std::norm(q) * mbar;
            const cplx rot = std::polar(1.0, e->angle);
            const cplx re = rot * eps;
            const double a2 = e->semi_major * e->semi_major;
            const double b2 = e->semi_minor * e->semi_minor;
            const double xa = re.real(), xb = re.imag();
            const double sig = xa * xa / a2 + xb * xb / b2;
            const double P = std::norm(q) * std::norm(q);
            if (sig < 1e-280) return 0.0;  // Q -> 0: fractional constraint -> -1
            const double gf = P / sig - 1.0;
            if (gf >= 0.0) return kInf;
            if (grad) {
                const cplx c_p = 4.0 * std::norm(q) * std::conj(q);
                const cplx c_xa = rot + 2.0 * (rot * mbar).real() * std::conj(q);
                const cplx c_xb =
                    cplx(0.0, -1.0) * rot + 2.0 * (rot * mbar).imag() * std::conj(q);
                const cplx c_sig = (2.0 * xa / a2) * c_xa + (2.0 * xb / b2) * c_xb;
                const cplx c_gf = (c_p * sig - P * c_sig) / (sig * sig);
                accumulate(*grad, cons_rows, c, mu * c_gf / (-gf));
            }
            return -mu * std::log(-gf);
        }
        // hull: critical pre-image p = ghat - 1/Q lies outside the hull iff
        // some chi_m > 0, i.e. some eta_m = |Q|^2 chi_m > 0; eta is
        // polynomial in the taps, so it stays smooth through Q = 0 (where
        // the exclusion holds trivially). The conservative smooth-max
        // (LSE - ln H / rho') keeps the barrier region inside the exact
        // feasible region.
        const auto& h = std::get<ConvexHull2D>(model);
        const double q2 = std::norm(q);
        if (q2 < kTinyQ * kTinyQ) return 0.0;  // removable Q = 0 degeneracy
        const double rho_eff = sharpness / hull_scale[c];
        const std::size_t H = h.halfspaces.size();
        double etamax_raw = -kInf;
        std::vector<double> eta(H);
        for (std::size_t m = 0; m < H; ++m) {
            const auto& hs = h.halfspaces[m];
            const cplx f = std::polar(1.0, -hs.angle);
            eta[m] = (f * (q2 * gh - std::conj(q))).real() + q2 * hs.offset;
            etamax_raw = std::max(etamax_raw, eta[m]);
        }
        double acc = 0.0;
        for (std::size_t m = 0; m < H; ++m) acc += std::exp(rho_eff * (eta[m] - etamax_raw));
        const double smax = etamax_raw + (std::log(acc) - std::log(double(H))) / rho_eff;
        if (smax <= 0.0) return kInf;
        if (grad) {
            cplx c_smax = 0.0;
            for (std::size_t m = 0; m < H; ++m) {
                const auto& hs = h.halfspaces[m];
                const double lam = std::exp(rho_eff * (eta[m] - etamax_raw)) / acc;
                const cplx f = std::polar(1.0, -hs.angle);
                const cplx c_eta =
                    2.0 * std::conj(q) * ((f * gh).real() + hs.offset) - std::conj(f);
                c_smax += lam * c_eta;
            }
            accumulate(*grad, cons_rows, c, -mu * c_smax / smax);
        }
        return -mu * std::log(smax);
    }

    // f = L + barrier; returns {f, L}; grad (if non-null) is overwritten.
    std::pair<double, double> objective(const std::vector<double>& w, double mu,
                                        std::vector<double>* grad) const {
        double L;
        if (grad) {
            grad->assign(N, 0.0);
            L = loss(q_loss(w), grad);
        } else {
            L = loss(q_loss(w), nullptr);
        }
        const std::vector<cplx> q = q_cons(w);
        double f = L;
        for (std::size_t c = 0; c < C; ++c) {
            const double v = barrier_row(c, q[c], mu, grad);
            if (v == kInf) return {kInf, L};
            f += v;
        }
        return {f, L};
    }

    void freeze_hull_scales(const std::vector<double>& w) {
        const std::vector<cplx> q = q_cons(w);
        for (std::size_t c = 0; c < C; ++c) {
            const auto* h = std::get_if<ConvexHull2D>(&entries[c].set);
            if (!h) continue;
            // scale by the positive slack in eta units: the smooth-max
            // conservatism gap is ln(H)/rho * scale, and tying it to the far
            // negative faces would wall off near-active rows entirely
            const double q2 = std::norm(q[c]);
            double mx = -kInf;
            for (const auto& hs : h->halfspaces) {
                const cplx f = std::polar(1.0, -hs.angle);
                mx = std::max(mx, (f * (q2 * cghat[c] - std::conj(q[c]))).real() +
                                      q2 * hs.offset);
            }
            hull_scale[c] = std::max(mx, 1e-12);
        }
    }

    // exact constraint values on the full (guard-augmented) row list
    std::vector<double> exact_all(const std::vector<double>& w) const {
        const std::vector<cplx> q = q_cons(w);
        std::vector<double> g(C);
        for (std::size_t c = 0; c < C; ++c)
            g[c] = constraints::constraint_value(q[c], entries[c].set, cghat[c],
                                                 spec.constraint_config);
        return g;
    }

    // exact, inflated constraint values reported per grid bin
    std::vector<double> exact_grid(const std::vector<double>& w) const {
        const std::vector<double> all = exact_all(w);
        std::vector<double> g(K, 0.0);
        for (std::size_t c = 0; c < C; ++c)
            if (entries[c].grid_bin >= 0) g[entries[c].grid_bin] = all[c];
        return g;
    }

    bool exact_feasible(const std::vector<double>& w, std::vector<std::size_t>* bad_bins,
                        bool* guard_only = nullptr) const {
        const std::vector<cplx> q = q_cons(w);
        bool ok = true;
        bool grid_ok = true;
        for (std::size_t c = 0; c < C; ++c) {
            if (constraints::is_feasible(q[c], entries[c].set, cghat[c],
                                         spec.constraint_config))
                continue;
            ok = false;
            if (entries[c].grid_bin >= 0) {
                grid_ok = false;
                if (bad_bins) bad_bins->push_back(std::size_t(entries[c].grid_bin));
            }
        }
        if (guard_only) *guard_only = !ok && grid_ok;
        return ok;
    }
};

// L-BFGS with Armijo backtracking; minimizes the barrier objective at fixed
// mu. Returns the final gradient inf-norm.
double lbfgs_minimize(const Problem& prob, std::vector<double>& w, double mu,
                      std::size_t max_iter, std::size_t memory, double gtol,
                      std::size_t* iters_out) {
    const std::size_t N = w.size();
    std::vector<double> grad(N), grad_new(N);
    auto [f, L] = prob.objective(w, mu, &grad);
    (void)L;
    if (f == kInf) throw std::logic_error("barrier started infeasible");

    std::deque<std::vector<double>> S, Y;
    std::deque<double> Rho;
    double gnorm = 0.0;
    std::size_t it = 0;
    for (; it < max_iter; ++it) {
        gnorm = 0.0;
        for (double v : grad) gnorm = std::max(gnorm, std::abs(v));
        if (gnorm <= gtol) break;

        // two-loop recursion
        std::vector<double> dir = grad;
        std::vector<double> alpha(S.size());
        for (std::size_t i = S.size(); i-- > 0;) {
            alpha[i] = Rho[i] * std::inner_product(S[i].begin(), S[i].end(), dir.begin(), 0.0);
            for (std::size_t n = 0; n < N; ++n) dir[n] -= alpha[i] * Y[i][n];
        }
        if (!S.empty()) {
            const auto& s = S.back();
            const auto& y = Y.back();
            const double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
            const double yy = std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
            if (yy > 0.0) {
                const double gamma = sy / yy;
                for (double& v : dir) v *= gamma;
            }
        }
        for (std::size_t i = 0; i < S.size(); ++i) {
            const double beta =
                Rho[i] * std::inner_product(Y[i].begin(), Y[i].end(), dir.begin(), 0.0);
            for (std::size_t n = 0; n < N; ++n) dir[n] += (alpha[i] - beta) * S[i][n];
        }
        double descent = -std::inner_product(dir.begin(), dir.end(), grad.begin(), 0.0);
        if (!(descent < 0.0)) {  // fall back to steepest descent
            dir = grad;
            S.clear();
            Y.clear();
            Rho.clear();
        }
        // cap the trial step near barrier walls where the gradient explodes
        double dmax = 0.0, wmax = 0.0;
        for (double v : dir) dmax = std::max(dmax, std::abs(v));
        for (double v : w) wmax = std::max(wmax, std::abs(v));
        const double cap = 0.5 * std::max(wmax, 1e-3);
        if (dmax > cap) {
            const double sc = cap / dmax;
            for (double& v : dir) v *= sc;
        }
        descent = -std::inner_product(dir.begin(), dir.end(), grad.begin(), 0.0);

        double step = 1.0;
        std::vector<double> w_new(N);
        double f_new = kInf;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t n = 0; n < N; ++n) w_new[n] = w[n] - step * dir[n];
            auto [fv, Lv] = prob.objective(w_new, mu, &grad_new);
            (void)Lv;
            f_new = fv;
            if (f_new <= f + 1e-4 * step * descent) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        std::vector<double> s(N), y(N);
        for (std::size_t n = 0; n < N; ++n) {
            s[n] = w_new[n] - w[n];
            y[n] = grad_new[n] - grad[n];
        }
        const double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
        const double ss = std::inner_product(s.begin(), s.end(), s.begin(), 0.0);
        const double yy = std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
        if (sy > 1e-12 * std::sqrt(ss * yy)) {
            S.push_back(std::move(s));
            Y.push_back(std::move(y));
            Rho.push_back(1.0 / sy);
            if (S.size() > memory) {
                S.pop_front();
                Y.pop_front();
                Rho.pop_front();
            }
        }
        w = w_new;
        f = f_new;
        grad = grad_new;
    }
    gnorm = 0.0;
    for (double v : grad) gnorm = std::max(gnorm, std::abs(v));
    if (iters_out) *iters_out = it;
    return gnorm;
}

void emit(const SolverSettings& s, const std::string& line) {
    if (s.trace_sink) s.trace_sink(line);
}

}  // namespace

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::max_iter: return "max-iter";
        case SolveStatus::infeasible: return "infeasible";
    }
    return "unknown";
}

void DesignSpec::validate() const {
    grid.validate();
    const std::size_t K = grid.size();
    if (weight.magnitudes.size() != K)
        throw config_error("weight has " + std::to_string(weight.magnitudes.size()) +
                           " bins, grid has " + std::to_string(K));
    if (model.bins.size() != K)
        throw config_error("uncertainty model has " + std::to_string(model.bins.size()) +
                           " bins, grid has " + std::to_string(K));
    if (internal_model.empty()) throw config_error("internal model is empty");
    if (internal_model[0] != 0.0)
        throw config_error("internal model must carry a pure delay (leading coefficient 0)");
    if (num_taps == 0) throw config_error("num_taps must be positive");
    for (double m : weight.magnitudes)
        if (!(m >= 0.0) || !std::isfinite(m)) throw config_error("weight must be finite and >= 0");
}

std::vector<cplx> DesignSpec::internal_response() const {
    return sigproc::evaluate_coeffs(internal_model, grid.bins);
}

std::pair<double, std::vector<double>> loss_and_gradient(const std::vector<double>& w,
                                                         const DesignSpec& spec) {
    spec.validate();
    if (w.size() != spec.num_taps) throw config_error("w length does not match num_taps");
    Problem prob(spec);
    std::vector<double> grad(spec.num_taps, 0.0);
    const double L = prob.loss(prob.q_loss(w), &grad);
    return {L, std::move(grad)};
}

OptimizationResult solve(const DesignSpec& spec) {
    return solve(spec, std::vector<double>(spec.num_taps, 0.0));
}

OptimizationResult solve(const DesignSpec& spec, const std::vector<double>& w0) {
    spec.validate();
    if (w0.size() != spec.num_taps) throw config_error("warm start length does not match num_taps");

    Problem prob(spec);
    OptimizationResult result;

    std::vector<double> w = w0;
    {
        // guard rows (midpoints, grid ends) may reject an externally feasible
        // start; shrinking toward w = 0 restores all barrier forms
        bool guard_only = false;
        std::vector<std::size_t> bad;
        bool ok = prob.exact_feasible(w, &bad, &guard_only);
        for (int tries = 0; !ok && guard_only && tries < 400; ++tries) {
            for (double& v : w) v *= 0.8;
            bad.clear();
            ok = prob.exact_feasible(w, &bad, &guard_only);
        }
        if (!ok) {
            result.status = SolveStatus::infeasible;
            result.infeasible_bins = bad;
            result.design.w = w0;
            result.design.internal_model = spec.internal_model;
            result.design.loss = prob.loss(prob.q_loss(w0), nullptr);
            result.design.constraint_values = prob.exact_grid(w0);
            emit(spec.solver,
                 "infeasible start: " + std::to_string(bad.size()) + " violating bins" +
                     (bad.empty() ? "" : " (first: bin " + std::to_string(bad.front()) + ")"));
            return result;
        }
    }

    const double L0 = prob.loss(prob.q_loss(w), nullptr);
    const double scale0 = std::max(std::abs(L0), 1.0);
    const std::size_t K = prob.K;
    double mu = std::max(0.1 * scale0 / double(K), spec.solver.mu_min);
    const double mu_stop =
        std::max(spec.solver.mu_min, spec.solver.tol_rel * scale0 / (1000.0 * double(K)));

    std::vector<double> best_w = w;
    double best_loss = L0;

    emit(spec.solver, "outer        mu            loss        max_g       inner  gnorm");
    std::size_t outer = 0;
    double gnorm = kInf;
    double mu_last = mu;
    while (outer < spec.solver.max_outer && mu > mu_stop) {
        prob.freeze_hull_scales(w);
        // the conservative hull barrier can exclude the current iterate after
        // a re-freeze; shrink toward 0 until the barrier is finite again
        for (int tries = 0; tries < 400 && prob.objective(w, mu, nullptr).first == kInf;
             ++tries) {
            for (double& v : w) v *= 0.8;
            if (tries == 399)
                for (double& v : w) v = 0.0;
            prob.freeze_hull_scales(w);
        }
        const double gtol = std::max(1e-2 * mu, 1e-11) * scale0;
        std::size_t inner = 0;
        gnorm = lbfgs_minimize(prob, w, mu, spec.solver.max_inner, spec.solver.lbfgs_memory,
                               gtol, &inner);
        const double L = prob.loss(prob.q_loss(w), nullptr);
        const std::vector<double> g = prob.exact_all(w);
        const double gmax = *std::max_element(g.begin(), g.end());
        if (prob.exact_feasible(w, nullptr) && L < best_loss) {
            best_w = w;
            best_loss = L;
        }
        ++outer;
        emit(spec.solver, fmt_line("%5zu  %12.4e  %12.6e  %10.3e  %5zu  %9.2e", outer, mu, L,
                                   gmax, inner, gnorm));
        mu_last = mu;
        mu /= spec.solver.barrier_decrease;
    }

    // polish: sharpen the hull smooth-max until the exact constraints agree
    // (or give up and fall back to the best feasible iterate)
    std::size_t bumps = 0;
    while (!prob.exact_feasible(w, nullptr) && bumps < spec.solver.max_sharpness_bumps) {
        prob.sharpness *= 8.0;
        prob.freeze_hull_scales(w);
        try {
            gnorm = lbfgs_minimize(prob, w, mu_last, spec.solver.max_inner,
                                   spec.solver.lbfgs_memory, 1e-2 * mu_last * scale0, nullptr);
        } catch (const std::logic_error&) {
            break;  // sharpened barrier no longer feasible at w; fall back
        }
        ++bumps;
    }
    if (prob.exact_feasible(w, nullptr)) {
        const double L = prob.loss(prob.q_loss(w), nullptr);
        if (L < best_loss) {
            best_w = w;
            best_loss = L;
        }
    }

    result.design.w = best_w;
    result.design.internal_model = spec.internal_model;
    result.design.loss = best_loss;
    result.design.constraint_values = prob.exact_grid(best_w);
    result.iterations = outer;

    // KKT report with lambda = mu / (-g) from the last barrier value
    {
        std::vector<double> grad(spec.num_taps, 0.0);
        prob.loss(prob.q_loss(best_w), &grad);
        const std::vector<cplx> q = prob.q_cons(best_w);
        const std::vector<double> g = prob.exact_all(best_w);
        double slack = 0.0;
        for (std::size_t c = 0; c < prob.C; ++c) {
            if (g[c] >= 0.0) continue;
            const double lam = mu_last / (-g[c]);
            slack = std::max(slack, lam * std::abs(g[c]));
            const cplx coef = constraints::constraint_gradient_phasor(
                q[c], prob.entries[c].set, prob.cghat[c], spec.constraint_config);
            prob.accumulate(grad, prob.cons_rows, c, lam * coef);
        }
        double r = 0.0;
        for (double v : grad) r = std::max(r, std::abs(v));
        result.kkt_grad_norm = r;
        result.kkt_slack = slack;
    }

    const double kkt_tol = 1e-3 * scale0;
    result.status = (mu <= mu_stop && result.kkt_grad_norm < kkt_tol)
                        ? SolveStatus::converged
                        : SolveStatus::max_iter;
    return result;
}

OptimizationResult warm_start_ladder(const DesignSpec& spec,
                                     const uncertainty::UncertaintyModel& disk_model) {
    spec.validate();
    if (disk_model.kind != uncertainty::ModelKind::norm_bounded)
        throw config_error("ladder base model must be norm_bounded");

    DesignSpec base = spec;
    base.model = disk_model;
    // looser base phase: keep the warm-start point strictly interior so the
    // target barrier has room to move
    base.solver.tol_rel = std::max(spec.solver.tol_rel, 1e-4);
    base.solver.mu_min = std::max(spec.solver.mu_min, 1e-6);
    OptimizationResult nb = solve(base);
    if (nb.status == SolveStatus::infeasible) return nb;
    if (spec.model.kind == uncertainty::ModelKind::norm_bounded) return nb;

    Problem target(spec);
    const bool nb_point_feasible = target.exact_feasible(nb.design.w, nullptr);
    if (!nb_point_feasible && spec.model.kind == uncertainty::ModelKind::convex_hull) {
        // hull sets are contained in the disks fitted from the same points,
        // so the disk optimum must be hull-feasible; anything else is a
        // fitting bug (ellipse/multi-disk members can stick outside the disk,
        // so those kinds fall through to the shrink below instead)
        std::vector<std::size_t> bad;
        target.exact_feasible(nb.design.w, &bad);
        throw std::runtime_error(
            "set-nesting assertion failed: norm-bounded optimum violates the hull model at bin " +
            std::to_string(bad.empty() ? 0 : bad.front()) + " (refit the models)");
    }

    // back the warm start off the constraint boundary (w = 0 is always
    // strictly feasible, so this terminates) so the target barrier starts
    // with usable interior slack
    std::vector<double> w0 = nb.design.w;
    for (int i = 0; i < 600; ++i) {
        const std::vector<double> g = target.exact_all(w0);
        if (*std::max_element(g.begin(), g.end()) < -1e-4) break;
        for (double& v : w0) v *= 0.95;
        if (i == 599) std::fill(w0.begin(), w0.end(), 0.0);
    }

    OptimizationResult out = solve(spec, w0);
    out.iterations += nb.iterations;
    // a heavily backed-off warm start (base optimum infeasible for the
    // target) can strand the solve in a poor corner; a cold solve is cheap
    // insurance whenever the warm result fails to beat the base loss
    if (out.status == SolveStatus::infeasible || out.design.loss > nb.design.loss) {
        OptimizationResult cold = solve(spec);
        cold.iterations += out.iterations;
        if (out.status == SolveStatus::infeasible ||
            (cold.status != SolveStatus::infeasible && cold.design.loss < out.design.loss))
            out = cold;
    }
    // descent guarantee relative to the ladder base: if the base optimum is
    // feasible for the target model, never return anything worse
    if (nb_point_feasible && nb.design.loss < out.design.loss) {
        out.design.w = nb.design.w;
        out.design.loss = nb.design.loss;
        out.design.constraint_values = target.exact_grid(nb.design.w);
    }
    return out;
}

}  // namespace anckit::optimizer
