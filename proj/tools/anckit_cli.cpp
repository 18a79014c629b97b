// anckit command line: generate | fit | design | verify
//
// Exit codes: 0 success, 1 internal error, 2 validation/usage error,
// 3 design reported infeasible.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "anckit/analysis.hpp"
#include "anckit/dataio.hpp"
#include "anckit/optimizer.hpp"
#include "anckit/sigproc.hpp"
#include "anckit/uncertainty.hpp"

using nlohmann::json;
using namespace anckit;

namespace {

int resolve_threads(int cli_threads) {
    if (cli_threads > 0) return cli_threads;
    if (const char* env = std::getenv("ANCKIT_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

void write_echo(const std::string& path, const std::string& subcommand, const json& options) {
    json j;
    j["subcommand"] = subcommand;
    j["options"] = options;
    std::ofstream out(path);
    if (!out) throw config_error("cannot write config echo " + path);
    out << j.dump(2) << "\n";
}

// Replays a config echo file: rebuilds the argv that produced it (explicit
// command line arguments still override, since they are appended last).
std::vector<std::string> argv_from_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config " + path);
    json j;
    in >> j;
    std::vector<std::string> args;
    args.push_back(j.at("subcommand").get<std::string>());
    for (const auto& [key, value] : j.at("options").items()) {
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back("--" + key);
            continue;
        }
        args.push_back("--" + key);
        if (value.is_string())
            args.push_back(value.get<std::string>());
        else
            args.push_back(value.dump());
    }
    return args;
}

struct GenerateArgs {
    std::string out = "observations.json";
    double fs = 48000.0;
    std::size_t bins = 1024;
    bool full_scale = false;
    dataio::SyntheticFitConfig cfg;
};

int cmd_generate(const GenerateArgs& a) {
    const std::size_t K = a.full_scale ? 8192 : a.bins;
    const FrequencyGrid grid = FrequencyGrid::linspaced(a.fs, K);
    const dataio::ObservationSet set = dataio::generate_synthetic(a.cfg, grid);
    dataio::save_observations(set, a.out);
    json opts{{"out", a.out},        {"fs", a.fs},
              {"bins", K},           {"seed", a.cfg.rng_seed},
              {"normal", a.cfg.num_normal}, {"loose", a.cfg.num_loose},
              {"tight", a.cfg.num_tight},   {"impulse-length", a.cfg.impulse_length},
              {"delay", a.cfg.delay_samples}};
    write_echo(a.out + ".config.json", "generate", opts);
    std::cerr << "wrote " << set.num_observations() << " observations to " << a.out << "\n";
    return 0;
}

struct FitArgs {
    std::string observations;
    std::string out = "model.json";
    std::string kind = "convex_hull";
    uncertainty::FitOptions opts;
};

int cmd_fit(const FitArgs& a) {
    const dataio::ObservationSet set = dataio::load_observations(a.observations);
    const uncertainty::ModelKind kind = uncertainty::model_kind_from_string(a.kind);
    const uncertainty::UncertaintyModel model =
        uncertainty::fit_models(set.grid, set.response_matrix(), kind, a.opts);
    uncertainty::save_model(model, a.out);
    {
        std::ofstream areas(a.out + ".areas.csv");
        areas << "model,bin,f_hz,area\n";
        for (std::size_t k = 0; k < model.bins.size(); ++k) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", uncertainty::area_of(model.bins[k]));
            areas << a.kind << "," << k << "," << set.grid.freq_hz(k) << "," << buf << "\n";
        }
    }
    json opts{{"observations", a.observations},
              {"out", a.out},
              {"kind", a.kind},
              {"disks", a.opts.num_disks},
              {"mvee-tol", a.opts.mvee_tol}};
    write_echo(a.out + ".config.json", "fit", opts);
    std::cerr << "fit " << a.kind << " model (" << model.bins.size() << " bins) to " << a.out
              << "\n";
    return 0;
}

struct DesignArgs {
    std::string observations;
    std::string model;
    std::string out = "controller.json";
    std::size_t taps = 256;
    bool full_scale = false;
    int weight_order = 8;
    double weight_peak = 31.0;
    double weight_lo = 40.0;
    double weight_hi = 1000.0;
    double tol = 1e-6;
    std::size_t max_outer = 40;
    double sharpness = 50.0;
    bool convex_sufficient = false;
    unsigned long long seed = 0;
    std::size_t disks = 6;
};

int cmd_design(const DesignArgs& a) {
    const dataio::ObservationSet set = dataio::load_observations(a.observations);
    const uncertainty::UncertaintyModel model = uncertainty::load_model(a.model);
    if (model.bins.size() != set.grid.size())
        throw config_error("model and observations use different grids");

    optimizer::DesignSpec spec;
    spec.grid = model.grid;
    spec.model = model;
    spec.internal_model = dataio::mean_impulse(set, "normal");
    spec.num_taps = a.full_scale ? 8192 : a.taps;
    spec.weight = sigproc::butterworth_bandpass_weight(spec.grid, a.weight_order, a.weight_peak,
                                                       a.weight_lo, a.weight_hi);
    spec.constraint_config.sharpness = a.sharpness;
    spec.constraint_config.convex_sufficient = a.convex_sufficient;
    spec.solver.tol_rel = a.tol;
    spec.solver.max_outer = a.max_outer;
    spec.solver.seed = a.seed;
    spec.solver.trace_sink = [](const std::string& line) { std::cerr << line << "\n"; };

    optimizer::OptimizationResult result;
    if (model.kind == uncertainty::ModelKind::norm_bounded) {
        result = optimizer::solve(spec);
    } else {
        uncertainty::FitOptions fo;
        fo.num_disks = a.disks;
        const uncertainty::UncertaintyModel disks = uncertainty::fit_models(
            set.grid, set.response_matrix(), uncertainty::ModelKind::norm_bounded, fo);
        result = optimizer::warm_start_ladder(spec, disks);
    }

    dataio::ControllerFile file;
    file.q = result.design.w;
    file.internal_model = spec.internal_model;
    file.sample_rate = spec.grid.sample_rate;
    file.model_kind = uncertainty::to_string(model.kind);
    file.status = optimizer::to_string(result.status);
    file.seed = a.seed;
    file.iterations = result.iterations;
    file.final_loss = result.design.loss;
    file.num_bins = spec.grid.size();
    file.weight_order = a.weight_order;
    file.weight_peak_db = a.weight_peak;
    file.weight_f_lo = a.weight_lo;
    file.weight_f_hi = a.weight_hi;
    dataio::export_controller(file, a.out);

    json opts{{"observations", a.observations},
              {"model", a.model},
              {"out", a.out},
              {"taps", spec.num_taps},
              {"weight-order", a.weight_order},
              {"weight-peak", a.weight_peak},
              {"weight-lo", a.weight_lo},
              {"weight-hi", a.weight_hi},
              {"tol", a.tol},
              {"max-outer", a.max_outer},
              {"sharpness", a.sharpness},
              {"seed", a.seed},
              {"disks", a.disks}};
    write_echo(a.out + ".config.json", "design", opts);

    std::cerr << "status " << file.status << ", loss " << file.final_loss << ", "
              << result.iterations << " outer iterations\n";
    if (result.status == optimizer::SolveStatus::infeasible) {
        std::cerr << "design infeasible at " << result.infeasible_bins.size() << " bins:";
        for (std::size_t i = 0; i < result.infeasible_bins.size() && i < 16; ++i)
            std::cerr << " " << result.infeasible_bins[i];
        std::cerr << "\n";
        return 3;
    }
    return 0;
}

struct VerifyArgs {
    std::string controller;
    std::string observations;
    std::string model;
    std::string cross;  // optional second observation set
    std::string out_dir = "report";
};

int cmd_verify(const VerifyArgs& a) {
    const dataio::ControllerFile ctl = dataio::import_controller(a.controller);
    const dataio::ObservationSet set = dataio::load_observations(a.observations);
    const uncertainty::UncertaintyModel model = uncertainty::load_model(a.model);

    const analysis::VerificationReport report =
        analysis::verify_design(ctl.q, ctl.internal_model, set, model);
    analysis::emit_report(report, a.out_dir);
    const analysis::AttenuationSummary summary = analysis::attenuation_metrics(report);

    std::size_t stable = 0;
    for (char s : report.stable) stable += s ? 1 : 0;
    std::cerr << "stable " << stable << "/" << report.stable.size() << " observations, transition "
              << (report.transition_stable ? "stable" : "UNSTABLE") << ", waterbed "
              << report.waterbed << "\n";
    std::cerr << "peak attenuation " << summary.peak_attenuation_db << " dB at "
              << summary.peak_frequency_hz << " Hz, overshoot above 1 kHz "
              << summary.overshoot_db << " dB\n";

    if (!a.cross.empty()) {
        const dataio::ObservationSet other = dataio::load_observations(a.cross);
        const analysis::VerificationReport crossrep =
            analysis::verify_design(ctl.q, ctl.internal_model, other, model);
        analysis::emit_report(crossrep, (std::filesystem::path(a.out_dir) / "cross").string());
        std::size_t cs = 0;
        for (char s : crossrep.stable) cs += s ? 1 : 0;
        std::cerr << "cross-validation: stable " << cs << "/" << crossrep.stable.size() << "\n";
    }

    json opts{{"controller", a.controller},
              {"observations", a.observations},
              {"model", a.model},
              {"out-dir", a.out_dir}};
    if (!a.cross.empty()) opts["cross"] = a.cross;
    write_echo((std::filesystem::path(a.out_dir) / "config.json").string(), "verify", opts);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robustly stable feedback ANC controller design toolkit"};
    app.require_subcommand(1);
    // --from-config replay prepends stored options; explicit flags repeat
    // them and must win
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    int threads = 0;
    std::string from_config;
    app.add_option("--threads", threads, "worker cap (accepted; current build is serial)");
    app.add_option("--from-config", from_config, "replay a resolved-config echo file");

    GenerateArgs g;
    auto* gen = app.add_subcommand("generate", "emit a synthetic observation set");
    gen->add_option("--out", g.out);
    gen->add_option("--fs", g.fs);
    gen->add_option("--bins", g.bins);
    gen->add_option("--seed", g.cfg.rng_seed);
    gen->add_option("--normal", g.cfg.num_normal);
    gen->add_option("--loose", g.cfg.num_loose);
    gen->add_option("--tight", g.cfg.num_tight);
    gen->add_option("--impulse-length", g.cfg.impulse_length);
    gen->add_option("--delay", g.cfg.delay_samples);
    gen->add_flag("--full-scale", g.full_scale, "use the 8192-bin grid");

    FitArgs f;
    auto* fit = app.add_subcommand("fit", "fit per-bin uncertainty models");
    fit->add_option("--observations", f.observations)->required();
    fit->add_option("--out", f.out);
    fit->add_option("--kind", f.kind,
                    "norm_bounded | multi_disk | elliptic | convex_hull");
    fit->add_option("--disks", f.opts.num_disks);
    fit->add_option("--mvee-tol", f.opts.mvee_tol);

    DesignArgs d;
    auto* des = app.add_subcommand("design", "synthesize a robust controller");
    des->add_option("--observations", d.observations)->required();
    des->add_option("--model", d.model)->required();
    des->add_option("--out", d.out);
    des->add_option("--taps", d.taps);
    des->add_flag("--full-scale", d.full_scale, "use 8192 FIR taps");
    des->add_option("--weight-order", d.weight_order);
    des->add_option("--weight-peak", d.weight_peak);
    des->add_option("--weight-lo", d.weight_lo);
    des->add_option("--weight-hi", d.weight_hi);
    des->add_option("--tol", d.tol);
    des->add_option("--max-outer", d.max_outer);
    des->add_option("--sharpness", d.sharpness);
    des->add_flag("--convex-sufficient", d.convex_sufficient);
    des->add_option("--seed", d.seed);
    des->add_option("--disks", d.disks);

    VerifyArgs v;
    auto* ver = app.add_subcommand("verify", "verify a controller against observations");
    ver->add_option("--controller", v.controller)->required();
    ver->add_option("--observations", v.observations)->required();
    ver->add_option("--model", v.model)->required();
    ver->add_option("--cross", v.cross);
    ver->add_option("--out-dir", v.out_dir);

    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    // --from-config replays a stored run; later explicit flags override
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--from-config") {
            std::vector<std::string> replay;
            try {
                replay = argv_from_config(args[i + 1]);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 2;
            }
            args.erase(args.begin() + i, args.begin() + i + 2);
            replay.insert(replay.end(), args.begin(), args.end());
            args = std::move(replay);
            break;
        }
    }
    std::vector<const char*> cargv{argv[0]};
    for (const std::string& s : args) cargv.push_back(s.c_str());

    try {
        app.parse(int(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    (void)resolve_threads(threads);

    try {
        if (gen->parsed()) return cmd_generate(g);
        if (fit->parsed()) return cmd_fit(f);
        if (des->parsed()) return cmd_design(d);
        if (ver->parsed()) return cmd_verify(v);
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
