// End-to-end acceptance runner: prints one PASS/FAIL line per criterion and
// exits nonzero if any of them fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "anckit/analysis.hpp"
#include "anckit/constraints.hpp"
#include "anckit/dataio.hpp"
#include "anckit/geometry.hpp"
#include "anckit/optimizer.hpp"
#include "anckit/sigproc.hpp"
#include "anckit/uncertainty.hpp"
#include "helpers.hpp"

using namespace anckit;
using uncertainty::ModelKind;

namespace {

double now_seconds() {
    using clk = std::chrono::steady_clock;
    static const clk::time_point t0 = clk::now();
    return std::chrono::duration<double>(clk::now() - t0).count();
}

struct Criterion {
    int id;
    bool pass;
    std::string note;
};

std::vector<Criterion> results;

void record(int id, bool pass, const std::string& note) {
    results.push_back({id, pass, note});
    std::printf("criterion %d: %s  (%s)\n", id, pass ? "PASS" : "FAIL", note.c_str());
    std::fflush(stdout);
}

// ------------------------------------------------------------------ geometry

bool covers(cplx c, double r, const std::vector<cplx>& pts, double tol) {
    for (cplx p : pts)
        if (std::abs(p - c) > r + tol) return false;
    return true;
}

geometry::Disk brute_force_circle(const std::vector<cplx>& pts) {
    geometry::Disk best{pts[0], 0.0};
    bool have = covers(best.center, best.radius, pts, 1e-12);
    auto consider = [&](cplx c, double r) {
        if (!covers(c, r, pts, 1e-9)) return;
        if (!have || r < best.radius) {
            best = {c, r};
            have = true;
        }
    };
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            consider((pts[i] + pts[j]) / 2.0, std::abs(pts[i] - pts[j]) / 2.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                const cplx a = pts[i], b = pts[j], c = pts[k];
                const double d = 2.0 * (a.real() * (b.imag() - c.imag()) +
                                        b.real() * (c.imag() - a.imag()) +
                                        c.real() * (a.imag() - b.imag()));
                if (std::abs(d) < 1e-14) continue;
                const double ux = (std::norm(a) * (b.imag() - c.imag()) +
                                   std::norm(b) * (c.imag() - a.imag()) +
                                   std::norm(c) * (a.imag() - b.imag())) /
                                  d;
                const double uy = (std::norm(a) * (c.real() - b.real()) +
                                   std::norm(b) * (a.real() - c.real()) +
                                   std::norm(c) * (b.real() - a.real())) /
                                  d;
                consider(cplx(ux, uy), std::abs(cplx(ux, uy) - a));
            }
    return best;
}

void criterion_1() {
    const double t0 = now_seconds();
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> nd(1, 12);
    bool ok = true;
    std::string why = "geometry oracles agree";

    for (int trial = 0; trial < 500 && ok; ++trial) {
        const auto pts = testutil::random_points(rng, nd(rng), 3.0);
        const auto got = geometry::smallest_circle(pts);
        const auto ref = brute_force_circle(pts);
        if (std::abs(got.radius - ref.radius) >= 1e-9 ||
            !covers(got.center, got.radius, pts, 1e-9)) {
            ok = false;
            why = "smallest_circle disagrees with brute force";
        }
    }

    std::uniform_int_distribution<std::size_t> md(3, 16);
    for (int trial = 0; trial < 200 && ok; ++trial) {
        const auto pts = testutil::random_points(rng, md(rng), 2.0);
        const auto e = geometry::min_area_ellipse(pts);
        for (cplx p : pts)
            if (!geometry::contains(e, p, 1e-6)) {
                ok = false;
                why = "MVEE containment violated";
            }
        // shrink test: contracting the axes by 10x the fit tolerance must
        // expel at least one input point (minimality)
        geometry::Ellipse shrunk = e;
        shrunk.semi_major *= 1.0 - 1e-4;
        shrunk.semi_minor *= 1.0 - 1e-4;
        bool expelled = false;
        for (cplx p : pts)
            if (!geometry::contains(shrunk, p, 0.0)) expelled = true;
        if (!expelled) {
            ok = false;
            why = "MVEE shrink test failed (ellipse not minimal)";
        }
    }

    for (int trial = 0; trial < 200 && ok; ++trial) {
        const auto pts = testutil::random_points(rng, md(rng), 2.0);
        const auto h = geometry::convex_hull(pts);
        for (cplx p : pts)
            if (!geometry::contains(h, p, 1e-9)) {
                ok = false;
                why = "hull membership violated";
            }
    }

    const double dt = now_seconds() - t0;
    if (ok && dt >= 30.0) {
        ok = false;
        why = "geometry suite too slow";
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s, %.1f s", why.c_str(), dt);
    record(1, ok, buf);
}

void criterion_2() {
    const double t0 = now_seconds();
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    constraints::ConstraintConfig cfg;
    std::size_t disagreements = 0, checked = 0;
    for (ModelKind kind : {ModelKind::norm_bounded, ModelKind::multi_disk, ModelKind::elliptic,
                           ModelKind::convex_hull}) {
        for (int trial = 0; trial < 1000; ++trial) {
            const auto set = testutil::random_geometry(rng, kind, 1.0);
            const cplx q(u(rng), u(rng));
            const cplx ghat(u(rng), u(rng));
            const double g = constraints::constraint_value(q, set, ghat, cfg);
            if (std::abs(g) <= 1e-9) continue;
            ++checked;
            const auto verdict = constraints::exclusion_oracle(q, set, ghat, 2048);
            if ((g < 0.0) != verdict.excluded) ++disagreements;
        }
    }
    const double dt = now_seconds() - t0;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%zu draws checked, %zu disagreements, %.1f s", checked,
                  disagreements, dt);
    record(2, disagreements == 0 && checked >= 3000 && dt < 60.0, buf);
}

void criterion_3() {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    constraints::ConstraintConfig cfg;
    const std::size_t N = 6;
    double worst_cons = 0.0;
    for (ModelKind kind : {ModelKind::norm_bounded, ModelKind::multi_disk, ModelKind::elliptic,
                           ModelKind::convex_hull}) {
        for (int trial = 0; trial < 100; ++trial) {
            const auto set = testutil::random_geometry(rng, kind, 1.0);
            const cplx ghat(u(rng), u(rng));
            const double omega = 0.1 + 2.9 * (0.5 + 0.5 * u(rng));
            std::vector<double> w(N);
            for (double& v : w) v = u(rng);
            auto eval = [&](const std::vector<double>& ws) {
                cplx q = 0.0;
                for (std::size_t n = 0; n < N; ++n)
                    q += ws[n] * std::exp(cplx(0.0, -double(n) * omega));
                const bool smooth = kind == ModelKind::convex_hull;
                return constraints::constraint_value(q, set, ghat, cfg, smooth);
            };
            const auto grad = constraints::constraint_gradient(w, omega, set, ghat, cfg);
            double gnorm = 1e-12;
            for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
            for (std::size_t n = 0; n < N; ++n) {
                const double h = 1e-6 * std::max(1.0, std::abs(w[n]));
                auto wp = w, wm = w;
                wp[n] += h;
                wm[n] -= h;
                const double fd = (eval(wp) - eval(wm)) / (2.0 * h);
                worst_cons = std::max(worst_cons, std::abs(fd - grad[n]) / gnorm);
            }
        }
    }

    // loss gradient against central differences at a desk-scale spec
    dataio::SyntheticFitConfig cfg2;
    cfg2.num_normal = 4;
    cfg2.num_loose = 2;
    cfg2.num_tight = 2;
    cfg2.impulse_length = 512;
    const auto grid = FrequencyGrid::linspaced(48000.0, 48);
    const auto set = dataio::generate_synthetic(cfg2, grid);
    optimizer::DesignSpec spec;
    spec.grid = grid;
    spec.internal_model = dataio::mean_impulse(set);
    spec.weight = sigproc::butterworth_bandpass_weight(grid, 8, 31.0, 40.0, 1000.0);
    spec.model = uncertainty::fit_models(grid, set.response_matrix(), ModelKind::norm_bounded);
    spec.num_taps = 12;
    double worst_loss = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> w(spec.num_taps);
        for (double& v : w) v = 0.2 * u(rng);
        const auto [L, grad] = optimizer::loss_and_gradient(w, spec);
        double gnorm = 1e-12;
        for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
        for (std::size_t n = 0; n < spec.num_taps; n += 3) {
            const double h = 1e-5;
            auto wp = w, wm = w;
            wp[n] += h;
            wm[n] -= h;
            const double fd = (optimizer::loss_and_gradient(wp, spec).first -
                               optimizer::loss_and_gradient(wm, spec).first) /
                              (2.0 * h);
            worst_loss = std::max(worst_loss, std::abs(fd - grad[n]) / gnorm);
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "constraint FD err %.2e (<1e-5), loss FD err %.2e (<1e-8)",
                  worst_cons, worst_loss);
    record(3, worst_cons < 1e-5 && worst_loss < 1e-8, buf);
}

optimizer::DesignSpec toy_spec(double radius) {
    // ghat = [0, 1, -1] has response exactly 1 at omega = pi/3
    optimizer::DesignSpec spec;
    spec.grid.sample_rate = 48000.0;
    spec.grid.bins = {M_PI / 3.0};
    spec.internal_model = {0.0, 1.0, -1.0};
    spec.weight.magnitudes = {1.0};
    uncertainty::UncertaintyModel model;
    model.kind = ModelKind::norm_bounded;
    model.grid = spec.grid;
    model.bins.push_back(geometry::Disk{cplx(1.0, 0.0), radius});
    spec.model = model;
    spec.num_taps = 1;
    spec.constraint_config.design_margin = 0.0;
    return spec;
}

void criterion_4() {
    const auto r1 = optimizer::solve(toy_spec(0.5));
    const auto r2 = optimizer::solve(toy_spec(2.0));
    const double e1 = std::abs(r1.design.w[0] - 1.0);
    const double e2 = std::abs(r2.design.w[0] - 0.5);
    const double eL1 = std::abs(r1.design.loss - 0.0);
    const double eL2 = std::abs(r2.design.loss - 0.25);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "|Q-1|=%.1e |L|=%.1e ; |Q-0.5|=%.1e |L-0.25|=%.1e", e1, eL1,
                  e2, eL2);
    record(4, e1 < 1e-6 && eL1 < 1e-6 && e2 < 1e-6 && eL2 < 1e-6, buf);
}

// Shared artifacts of the full-scale pipeline (criteria 5-10)
struct Pipeline {
    dataio::ObservationSet set;
    uncertainty::UncertaintyModel nb, ell, ch;
    optimizer::DesignSpec spec_nb, spec_ell, spec_ch;
    optimizer::OptimizationResult res_nb, res_ell, res_ch;
    double seconds = 0.0;
    bool feasible = false;
};

Pipeline run_pipeline() {
    const double t0 = now_seconds();
    Pipeline p;
    dataio::SyntheticFitConfig cfg;  // seed 7, 24 observations, 4096-sample impulses
    const auto grid = FrequencyGrid::linspaced(48000.0, 1024);
    p.set = dataio::generate_synthetic(cfg, grid);
    const auto matrix = p.set.response_matrix();
    p.nb = uncertainty::fit_models(grid, matrix, ModelKind::norm_bounded);
    p.ell = uncertainty::fit_models(grid, matrix, ModelKind::elliptic);
    p.ch = uncertainty::fit_models(grid, matrix, ModelKind::convex_hull);

    optimizer::DesignSpec spec;
    spec.grid = grid;
    spec.internal_model = dataio::mean_impulse(p.set);
    spec.weight = sigproc::butterworth_bandpass_weight(grid, 8, 31.0, 40.0, 1000.0);
    spec.num_taps = 256;

    p.spec_nb = spec;
    p.spec_nb.model = p.nb;
    p.res_nb = optimizer::solve(p.spec_nb);
    p.spec_ell = spec;
    p.spec_ell.model = p.ell;
    p.res_ell = optimizer::warm_start_ladder(p.spec_ell, p.nb);
    p.spec_ch = spec;
    p.spec_ch.model = p.ch;
    p.res_ch = optimizer::warm_start_ladder(p.spec_ch, p.nb);
    p.seconds = now_seconds() - t0;
    p.feasible = p.res_nb.status != optimizer::SolveStatus::infeasible &&
                 p.res_ell.status != optimizer::SolveStatus::infeasible &&
                 p.res_ch.status != optimizer::SolveStatus::infeasible;
    return p;
}

void criterion_5(const Pipeline& p) {
    const double L_nb = p.res_nb.design.loss;
    const double L_ell = p.res_ell.design.loss;
    const double L_ch = p.res_ch.design.loss;
    const bool order = L_ch <= L_ell + 1e-6 && L_ch <= 0.95 * L_nb;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "L_nb=%.4f L_ell=%.4f L_ch=%.4f, pipeline %.0f s", L_nb,
                  L_ell, L_ch, p.seconds);
    record(5, p.feasible && order && p.seconds < 300.0, buf);
}

void criterion_6(const Pipeline& p) {
    std::size_t violations = 0;
    double ratio_sum = 0.0;
    const std::size_t K = p.nb.bins.size();
    for (std::size_t k = 0; k < K; ++k) {
        const double a_d = uncertainty::area_of(p.nb.bins[k]);
        const double a_e = uncertainty::area_of(p.ell.bins[k]);
        const double a_h = uncertainty::area_of(p.ch.bins[k]);
        // tiny relative slack absorbs the MVEE fit tolerance
        if (a_h > a_e * (1.0 + 1e-6) || a_e > a_d * (1.0 + 1e-6)) ++violations;
        ratio_sum += a_d > 0.0 ? a_h / a_d : 0.0;
    }
    const double mean_ratio = ratio_sum / double(K);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%zu ordering violations, mean hull/disk area ratio %.3f",
                  violations, mean_ratio);
    record(6, violations == 0 && mean_ratio < 1.0, buf);
}

void criterion_7_8_9(const Pipeline& p) {
    bool all_stable = true, transitions = true, waterbed_ok = true;
    double worst_wb = 0.0;
    const struct {
        const optimizer::OptimizationResult* res;
        const optimizer::DesignSpec* spec;
        const uncertainty::UncertaintyModel* model;
    } runs[] = {{&p.res_nb, &p.spec_nb, &p.nb},
                {&p.res_ell, &p.spec_ell, &p.ell},
                {&p.res_ch, &p.spec_ch, &p.ch}};
    std::vector<analysis::VerificationReport> reports;
    for (const auto& r : runs) {
        reports.push_back(
            analysis::verify_design(r.res->design.w, r.spec->internal_model, p.set, *r.model));
        const auto& rep = reports.back();
        if (!rep.all_stable()) all_stable = false;
        if (!rep.transition_stable) transitions = false;
        worst_wb = std::min(worst_wb, rep.waterbed);
        if (rep.waterbed < -1e-6) waterbed_ok = false;
    }

    // destructive control: a 10x-scaled controller must fail somewhere
    auto wbad = p.res_ch.design.w;
    for (double& v : wbad) v *= 10.0;
    const auto bad =
        analysis::verify_design(wbad, p.spec_ch.internal_model, p.set, p.ch);
    bool any_bad = !bad.transition_stable;
    for (char s : bad.stable)
        if (!s) any_bad = true;

    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "stability %s, transitions %s, scaled-up controller %s",
                  all_stable ? "24/24 x3 kinds" : "FAILED", transitions ? "stable" : "FAILED",
                  any_bad ? "fails as expected" : "did not fail");
    record(7, all_stable && transitions && any_bad, buf);

    std::snprintf(buf, sizeof(buf), "worst waterbed functional %.2e (>= -1e-6)", worst_wb);
    record(8, waterbed_ok, buf);

    // nominal identity at G = Ghat, every bin of every design
    double worst = 0.0;
    for (const auto& r : runs) {
        const auto q = sigproc::evaluate_coeffs(r.res->design.w, p.set.grid.bins);
        const auto gh = sigproc::evaluate_coeffs(r.spec->internal_model, p.set.grid.bins);
        const auto s = analysis::closed_loop_response(q, gh, gh);
        for (std::size_t k = 0; k < s.size(); ++k)
            worst = std::max(worst, std::abs(s[k] - (1.0 - q[k] * gh[k])));
    }
    std::snprintf(buf, sizeof(buf), "max |S - (1 - Q Ghat)| = %.2e (<= 1e-14)", worst);
    record(9, worst <= 1e-14, buf);
}

void criterion_10() {
    namespace fs = std::filesystem;
    const char* cli = std::getenv("ANCKIT_CLI");
    if (!cli) {
        record(10, false, "ANCKIT_CLI not set");
        return;
    }
    const std::string dir = "/tmp/anckit_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto run = [&](const std::string& args) {
        const std::string cmd =
            std::string(cli) + " " + args + " >> " + dir + "/log.txt 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    auto slurp = [](const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    bool ok = true;
    for (const char* tag : {"r1", "r2"}) {
        const std::string base = dir + "/" + tag;
        ok = ok &&
             run("generate --bins 128 --impulse-length 512 --normal 4 --loose 2 --tight 2 "
                 "--out " + base + "_obs.json");
        ok = ok && run("fit --observations " + base + "_obs.json --kind convex_hull --out " +
                       base + "_model.json");
        ok = ok && run("design --observations " + base + "_obs.json --model " + base +
                       "_model.json --taps 32 --out " + base + "_ctl.json");
    }
    const std::string a = slurp(dir + "/r1_ctl.json");
    const std::string b = slurp(dir + "/r2_ctl.json");
    const bool identical = ok && !a.empty() && a == b;
    record(10, identical,
           identical ? "independent end-to-end runs byte-identical"
                     : "controller files differ or pipeline failed");
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    const Pipeline p = run_pipeline();
    criterion_5(p);
    criterion_6(p);
    criterion_7_8_9(p);
    criterion_10();

    std::size_t failed = 0;
    for (const auto& c : results)
        if (!c.pass) ++failed;
    if (failed) {
        std::printf("%zu criteria FAILED\n", failed);
        return 1;
    }
    std::printf("all %zu criteria passed\n", results.size());
    return 0;
}
