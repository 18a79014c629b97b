#include "anckit/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "anckit/sigproc.hpp"

namespace anckit::analysis {

namespace {

constexpr double kOverflow = 1e12;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// time-varying IMC recursion shared by the fixed and cross-fade simulations;
// alpha(n) blends plant_a -> plant_b (alpha empty means fixed plant_a)
SimulationResult run_loop(const std::vector<double>& q, const std::vector<double>& ghat,
                          const std::vector<double>& plant_a, const std::vector<double>& plant_b,
                          const std::vector<double>& alpha, Excitation excitation,
                          std::size_t horizon, unsigned long long noise_seed) {
    if (plant_a.empty() || plant_a[0] != 0.0)
        throw config_error("plant impulse response must start with a zero sample (pure delay)");
    if (!plant_b.empty() && plant_b[0] != 0.0)
        throw config_error("plant impulse response must start with a zero sample (pure delay)");
    if (ghat.empty() || ghat[0] != 0.0)
        throw config_error("internal model must start with a zero sample (pure delay)");
    const std::size_t longest = std::max({q.size(), plant_a.size(), plant_b.size()});
    if (horizon < 8 * longest)
        throw config_error("simulation horizon must be at least 8 x the longest filter");

    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> dist(0.0, 1.0);

    const std::size_t ulen = std::max({plant_a.size(), plant_b.size(), ghat.size()});
    std::vector<double> u(horizon + ulen, 0.0);   // shifted by ulen, u[ulen + n] = u(n)
    std::vector<double> v(horizon + q.size(), 0.0);
    SimulationResult res;
    res.error.resize(horizon, 0.0);

    for (std::size_t n = 0; n < horizon; ++n) {
        const double d = excitation == Excitation::impulse ? (n == 0 ? 1.0 : 0.0) : dist(rng);
        const double a = alpha.empty() ? 0.0 : alpha[n];

        double conv_g = 0.0;
        for (std::size_t m = 1; m < plant_a.size(); ++m)
            conv_g += plant_a[m] * u[ulen + n - m];
        if (a != 0.0) {
            double conv_b = 0.0;
            for (std::size_t m = 1; m < plant_b.size(); ++m)
                conv_b += plant_b[m] * u[ulen + n - m];
            conv_g = (1.0 - a) * conv_g + a * conv_b;
        }
        const double e = d - conv_g;

        double conv_ghat = 0.0;
        for (std::size_t m = 1; m < ghat.size(); ++m) conv_ghat += ghat[m] * u[ulen + n - m];
        const double vn = e + conv_ghat;
        v[q.size() + n] = vn;

        double un = 0.0;
        for (std::size_t m = 0; m < q.size(); ++m) un += q[m] * v[q.size() + n - m];
        u[ulen + n] = un;
        res.error[n] = e;

        if (!std::isfinite(e) || std::abs(e) > kOverflow || std::abs(un) > kOverflow) {
            res.overflowed = true;
            res.overflow_index = n;
            res.stable = false;
            res.tail_ratio = std::numeric_limits<double>::infinity();
            res.error.resize(n + 1);
            return res;
        }
    }

    const std::size_t tenth = std::max<std::size_t>(horizon / 10, 1);
    double head = 0.0, tail = 0.0;
    for (std::size_t n = 0; n < tenth; ++n) head += res.error[n] * res.error[n];
    for (std::size_t n = horizon - tenth; n < horizon; ++n) tail += res.error[n] * res.error[n];
    res.tail_ratio = head > 0.0 ? tail / head : (tail > 0.0 ? 1.0 : 0.0);
    res.stable = res.tail_ratio < 1e-10;
    return res;
}

}  // namespace

std::vector<cplx> closed_loop_response(const std::vector<cplx>& q_resp,
                                       const std::vector<cplx>& ghat_resp,
                                       const std::vector<cplx>& plant_resp,
                                       std::vector<std::size_t>* on_boundary) {
    if (q_resp.size() != ghat_resp.size() || q_resp.size() != plant_resp.size())
        throw config_error("closed_loop_response: mismatched grid sizes");
    std::vector<cplx> s(q_resp.size());
    for (std::size_t k = 0; k < q_resp.size(); ++k) {
        const cplx num = 1.0 - ghat_resp[k] * q_resp[k];
        const cplx den = 1.0 + q_resp[k] * (plant_resp[k] - ghat_resp[k]);
        if (std::abs(den) < 1e-12) {
            if (on_boundary) on_boundary->push_back(k);
            s[k] = num / cplx(1e-12);
        } else {
            s[k] = num / den;
        }
    }
    return s;
}

SimulationResult simulate_closed_loop(const std::vector<double>& q,
                                      const std::vector<double>& ghat,
                                      const std::vector<double>& plant, Excitation excitation,
                                      std::size_t horizon, unsigned long long noise_seed) {
    return run_loop(q, ghat, plant, {}, {}, excitation, horizon, noise_seed);
}

SimulationResult simulate_transition(const std::vector<double>& q,
                                     const std::vector<double>& ghat,
                                     const std::vector<double>& plant_a,
                                     const std::vector<double>& plant_b, Excitation excitation,
                                     std::size_t horizon, unsigned long long noise_seed) {
    std::vector<double> alpha(horizon, 0.0);
    const std::size_t lo = horizon / 3, hi = 2 * horizon / 3;
    for (std::size_t n = 0; n < horizon; ++n) {
        if (n >= hi) {
            alpha[n] = 1.0;
        } else if (n > lo) {
            alpha[n] = double(n - lo) / double(hi - lo);
        }
    }
    return run_loop(q, ghat, plant_a, plant_b, alpha, excitation, horizon, noise_seed);
}

bool VerificationReport::all_stable() const {
    for (char s : stable)
        if (!s) return false;
    return transition_stable;
}

VerificationReport verify_design(const std::vector<double>& q,
                                 const std::vector<double>& ghat_fir,
                                 const dataio::ObservationSet& set,
                                 const uncertainty::UncertaintyModel& model,
                                 const constraints::ConstraintConfig& config) {
    (void)config;
    const auto t0 = std::chrono::steady_clock::now();
    set.validate();
    const FrequencyGrid& grid = set.grid;
    const std::size_t K = grid.size();
    if (model.bins.size() != K) throw config_error("model and observations use different grids");

    VerificationReport rep;
    rep.grid = grid;
    rep.model_kind = uncertainty::to_string(model.kind);

    const std::vector<cplx> q_resp = sigproc::evaluate_coeffs(q, grid.bins);
    const std::vector<cplx> ghat_resp = sigproc::evaluate_coeffs(ghat_fir, grid.bins);

    rep.margins.resize(K);
    rep.areas.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const auto verdict =
            constraints::exclusion_oracle(q_resp[k], model.bins[k], ghat_resp[k]);
        rep.margins[k] = verdict.excluded ? verdict.margin : -verdict.margin;
        rep.areas[k] = uncertainty::area_of(model.bins[k]);
    }

    const std::size_t longest = std::max(q.size(), [&] {
        std::size_t len = ghat_fir.size();
        for (const auto& o : set.observations) len = std::max(len, o.impulse.size());
        return len;
    }());
    const std::size_t horizon = 8 * longest;

    // slowly decaying (but stable) loops can miss the tail threshold at the
    // base horizon; extend while the tail keeps shrinking before giving a
    // verdict
    auto settle = [&](const std::vector<double>& plant) {
        SimulationResult sim =
            simulate_closed_loop(q, ghat_fir, plant, Excitation::impulse, horizon);
        for (std::size_t mult = 16; !sim.stable && !sim.overflowed && mult <= 512; mult *= 2) {
            SimulationResult next =
                simulate_closed_loop(q, ghat_fir, plant, Excitation::impulse, mult * longest);
            if (!next.stable && next.tail_ratio >= sim.tail_ratio) return next;
            sim = next;
        }
        return sim;
    };

    std::vector<double> sum_db(K, 0.0);
    for (const auto& obs : set.observations) {
        rep.labels.push_back(obs.label);
        const std::vector<cplx> s = closed_loop_response(q_resp, ghat_resp, obs.response);
        std::vector<double> db(K);
        for (std::size_t k = 0; k < K; ++k) {
            db[k] = db_from_mag(std::max(std::abs(s[k]), 1e-300));
            sum_db[k] += db[k];
        }
        rep.closed_loop_db.push_back(std::move(db));
        if (obs.impulse.empty())
            throw config_error("verification needs impulse responses for every observation");
        rep.stable.push_back(settle(obs.impulse).stable ? 1 : 0);
    }
    rep.mean_db.resize(K);
    for (std::size_t k = 0; k < K; ++k)
        rep.mean_db[k] = sum_db[k] / double(set.observations.size());
    rep.mean_db_smoothed = sigproc::octave_smooth(rep.mean_db, grid, 6.0);

    // loose/tight cross-fade (fall back to the first/last observation when
    // those labels are absent)
    const std::vector<double>* pa = &set.observations.front().impulse;
    const std::vector<double>* pb = &set.observations.back().impulse;
    for (const auto& o : set.observations) {
        if (o.label == "loose") pa = &o.impulse;
        if (o.label == "tight") pb = &o.impulse;
    }
    rep.transition_stable = [&] {
        SimulationResult sim =
            simulate_transition(q, ghat_fir, *pa, *pb, Excitation::impulse, horizon);
        for (std::size_t mult = 16; !sim.stable && !sim.overflowed && mult <= 512; mult *= 2) {
            SimulationResult next =
                simulate_transition(q, ghat_fir, *pa, *pb, Excitation::impulse, mult * longest);
            if (!next.stable && next.tail_ratio >= sim.tail_ratio) return next.stable;
            sim = next;
        }
        return sim.stable;
    }();

    rep.waterbed = sigproc::waterbed_of_design(q, ghat_fir, K);
    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

AttenuationSummary attenuation_metrics(const VerificationReport& report) {
    AttenuationSummary s;
    const auto& curve = report.mean_db_smoothed;
    if (curve.empty()) return s;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < curve.size(); ++k)
        if (curve[k] < curve[arg]) arg = k;
    s.peak_attenuation_db = curve[arg];
    s.peak_frequency_hz = report.grid.freq_hz(arg);
    s.overshoot_db = 0.0;
    for (std::size_t k = 0; k < curve.size(); ++k)
        if (report.grid.freq_hz(k) > 1000.0) s.overshoot_db = std::max(s.overshoot_db, curve[k]);
    return s;
}

std::vector<double> improvement_curve(const VerificationReport& a,
                                      const VerificationReport& b) {
    if (a.mean_db.size() != b.mean_db.size())
        throw config_error("improvement_curve: mismatched grids");
    std::vector<double> out(a.mean_db.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = a.mean_db[k] - b.mean_db[k];
    return out;
}

// ------------------------------------------------------------------ report

namespace {

// minimal polyline plot; x is log-frequency
void write_svg(const std::string& path, const FrequencyGrid& grid,
               const std::vector<std::pair<std::string, const std::vector<double>*>>& curves,
               const std::string& title, const std::string& y_label) {
    const int W = 860, H = 480, ml = 60, mr = 20, mt = 40, mb = 40;
    double ymin = 1e300, ymax = -1e300;
    for (const auto& [name, c] : curves)
        for (double v : *c) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    if (!(ymax > ymin)) {
        ymax = ymin + 1.0;
        ymin -= 1.0;
    }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    const double x0 = std::log10(grid.freq_hz(0));
    const double x1 = std::log10(grid.freq_hz(grid.size() - 1));
    auto px = [&](std::size_t k) {
        return ml + (std::log10(grid.freq_hz(k)) - x0) / (x1 - x0) * (W - ml - mr);
    };
    auto py = [&](double v) { return mt + (ymax - v) / (ymax - ymin) * (H - mt - mb); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#7f7f7f"};
    std::ofstream out(path);
    if (!out) throw config_error("cannot write " + path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
        << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"16\">" << title << "</text>\n"
        << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
        << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << y_label
        << "</text>\n";
    // axes box and a few gridlines
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
        << "\" height=\"" << H - mt - mb << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (double f = std::pow(10.0, std::ceil(x0)); f < std::pow(10.0, x1); f *= 10.0) {
        const double x = ml + (std::log10(f) - x0) / (x1 - x0) * (W - ml - mr);
        out << "<line x1=\"" << x << "\" y1=\"" << mt << "\" x2=\"" << x << "\" y2=\""
            << H - mb << "\" stroke=\"#ddd\"/>\n"
            << "<text x=\"" << x << "\" y=\"" << H - mb + 16
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << int(f) << " Hz</text>\n";
    }
    int ci = 0;
    for (const auto& [name, c] : curves) {
        out << "<polyline fill=\"none\" stroke=\"" << palette[ci % 7]
            << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t k = 0; k < c->size(); ++k) out << px(k) << "," << py((*c)[k]) << " ";
        out << "\"/>\n";
        out << "<text x=\"" << W - mr - 8 << "\" y=\"" << mt + 16 + 14 * ci
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
            << palette[ci % 7] << "\">" << name << "</text>\n";
        ++ci;
    }
    out << "</svg>\n";
}

}  // namespace

void emit_report(const VerificationReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::size_t K = report.grid.size();

    {
        std::ofstream csv(fs::path(out_dir) / "report.csv");
        if (!csv) throw config_error("cannot write report.csv in " + out_dir);
        csv << "model,observation,bin,f_hz,s_db,margin\n";
        for (std::size_t i = 0; i < report.closed_loop_db.size(); ++i)
            for (std::size_t k = 0; k < K; ++k)
                csv << report.model_kind << "," << i << "_" << report.labels[i] << "," << k << ","
                    << fmt17(report.grid.freq_hz(k)) << "," << fmt17(report.closed_loop_db[i][k])
                    << "," << fmt17(report.margins[k]) << "\n";
    }
    {
        std::ofstream csv(fs::path(out_dir) / "areas.csv");
        if (!csv) throw config_error("cannot write areas.csv in " + out_dir);
        csv << "model,bin,f_hz,area\n";
        for (std::size_t k = 0; k < K; ++k)
            csv << report.model_kind << "," << k << "," << fmt17(report.grid.freq_hz(k)) << ","
                << fmt17(report.areas[k]) << "\n";
    }

    std::vector<std::pair<std::string, const std::vector<double>*>> sens;
    for (std::size_t i = 0; i < report.closed_loop_db.size(); ++i)
        sens.emplace_back(std::to_string(i) + " " + report.labels[i],
                          &report.closed_loop_db[i]);
    sens.emplace_back("mean (smoothed)", &report.mean_db_smoothed);
    write_svg((fs::path(out_dir) / "sensitivity.svg").string(), report.grid, sens,
              "closed-loop magnitude, " + report.model_kind, "|S| dB");
    write_svg((fs::path(out_dir) / "areas.svg").string(), report.grid,
              {{report.model_kind, &report.areas}}, "model area over frequency", "area");
    write_svg((fs::path(out_dir) / "margins.svg").string(), report.grid,
              {{report.model_kind, &report.margins}}, "stability margin over frequency",
              "min |1 + Q(G-Ghat)| (signed)");
}

}  // namespace anckit::analysis
