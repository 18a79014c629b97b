#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "anckit/dataio.hpp"
#include "anckit/optimizer.hpp"
#include "anckit/sigproc.hpp"

#include <json.hpp>

using namespace anckit;
using namespace anckit::dataio;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const std::string tmpdir = "/tmp/anckit_dataio_test";

struct DirGuard {
    DirGuard() {
        std::filesystem::remove_all(tmpdir);
        std::filesystem::create_directories(tmpdir);
    }
    ~DirGuard() { std::filesystem::remove_all(tmpdir); }
};

}  // namespace

TEST_CASE("observation files round trip bitwise") {
    DirGuard guard;
    SyntheticFitConfig cfg;
    cfg.num_normal = 3;
    cfg.num_loose = 2;
    cfg.num_tight = 2;
    cfg.impulse_length = 512;
    const auto grid = FrequencyGrid::linspaced(48000.0, 32);
    const auto set = generate_synthetic(cfg, grid);

    const std::string p1 = tmpdir + "/set1.json";
    const std::string p2 = tmpdir + "/set2.json";
    save_observations(set, p1);
    const auto back = load_observations(p1);
    CHECK(back.grid.sample_rate == set.grid.sample_rate);
    REQUIRE(back.num_observations() == set.num_observations());
    for (std::size_t i = 0; i < set.num_observations(); ++i) {
        CHECK(back.observations[i].label == set.observations[i].label);
        CHECK(back.observations[i].response == set.observations[i].response);
        CHECK(back.observations[i].impulse == set.observations[i].impulse);
    }
    save_observations(back, p2);
    CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("hand-written observation json evaluates as expected") {
    DirGuard guard;
    // a unit impulse at lag zero has response identically one
    const auto grid = FrequencyGrid::linspaced(48000.0, 8);
    nlohmann::json j;
    j["version"] = "1";
    j["grid"] = {{"sample_rate", 48000.0}, {"num_bins", 8}, {"bins", grid.bins}};
    j["observations"] = nlohmann::json::array();
    nlohmann::json obs;
    obs["label"] = "normal";
    obs["impulse"] = std::vector<double>{1.0};
    j["observations"].push_back(obs);
    nlohmann::json obs2;
    obs2["label"] = "normal";
    obs2["impulse"] = std::vector<double>{0.0, 1.0};  // pure one-sample delay
    j["observations"].push_back(obs2);
    const std::string path = tmpdir + "/hand.json";
    std::ofstream(path) << j.dump(2);

    const auto set = load_observations(path);
    REQUIRE(set.num_observations() == 2);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(std::abs(set.observations[0].response[k] - 1.0) <= 1e-12);
        const cplx expect = std::exp(cplx(0.0, -grid.bins[k]));
        CHECK(std::abs(set.observations[1].response[k] - expect) <= 1e-12);
    }
}

TEST_CASE("generator is deterministic and shaped as documented") {
    SyntheticFitConfig cfg;
    cfg.impulse_length = 1024;
    const auto grid = FrequencyGrid::linspaced(48000.0, 256);
    const auto a = generate_synthetic(cfg, grid);
    const auto b = generate_synthetic(cfg, grid);
    REQUIRE(a.num_observations() == b.num_observations());
    for (std::size_t i = 0; i < a.num_observations(); ++i) {
        CHECK(a.observations[i].response == b.observations[i].response);
        CHECK(a.observations[i].impulse == b.observations[i].impulse);
    }

    std::size_t normal = 0, loose = 0, tight = 0;
    for (const auto& o : a.observations) {
        if (o.label == "normal") ++normal;
        if (o.label == "loose") ++loose;
        if (o.label == "tight") ++tight;
        REQUIRE(o.impulse.size() == cfg.impulse_length);
        // strict delay: the internal model assumption needs leading zeros
        for (std::size_t n = 0; n < cfg.delay_samples; ++n) CHECK(o.impulse[n] == 0.0);
    }
    CHECK(normal == cfg.num_normal);
    CHECK(loose == cfg.num_loose);
    CHECK(tight == cfg.num_tight);

    // tight fits sit a low-shelf boost above normals below 1 kHz
    auto mean_db_below = [&](const std::string& label, double f_lo, double f_hi) {
        double sum = 0.0;
        std::size_t cnt = 0, used = 0;
        for (const auto& o : a.observations) {
            if (o.label != label) continue;
            ++used;
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const double f = grid.freq_hz(k);
                if (f < f_lo || f > f_hi) continue;
                sum += 20.0 * std::log10(std::abs(o.response[k]));
                ++cnt;
            }
        }
        REQUIRE(used > 0);
        return sum / double(cnt);
    };
    const double normal_db = mean_db_below("normal", 100.0, 1000.0);
    const double tight_db = mean_db_below("tight", 100.0, 1000.0);
    CHECK(tight_db - normal_db == doctest::Approx(6.0).epsilon(0.25));

    // loose fits lose substantial level at the bottom of the band
    const double normal_lf = mean_db_below("normal", 30.0, 120.0);
    const double loose_lf = mean_db_below("loose", 30.0, 120.0);
    CHECK(normal_lf - loose_lf > 8.0);

    // the family spans a wide low-frequency range overall
    double lo = 1e9, hi = -1e9;
    for (const auto& o : a.observations)
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double f = grid.freq_hz(k);
            if (f < 30.0 || f > 200.0) continue;
            const double db = 20.0 * std::log10(std::abs(o.response[k]));
            lo = std::min(lo, db);
            hi = std::max(hi, db);
        }
    CHECK(hi - lo >= 20.0);
}

TEST_CASE("csv observation import") {
    DirGuard guard;
    const std::string path = tmpdir + "/obs.csv";
    {
        std::ofstream f(path);
        f << "# anckit-observations v1 sample_rate=48000 num_bins=8 data=impulse\n";
        f << "normal,0,1\n";
    }
    const auto set = load_observations(path, "csv");
    REQUIRE(set.num_observations() == 1);
    const auto grid = FrequencyGrid::linspaced(48000.0, 8);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const cplx expect = std::exp(cplx(0.0, -grid.bins[k]));
        CHECK(std::abs(set.observations[0].response[k] - expect) <= 1e-12);
    }
}

TEST_CASE("controller files round trip and record a recomputable loss") {
    DirGuard guard;
    SyntheticFitConfig cfg;
    cfg.num_normal = 4;
    cfg.num_loose = 2;
    cfg.num_tight = 2;
    cfg.impulse_length = 512;
    const auto grid = FrequencyGrid::linspaced(48000.0, 32);
    const auto set = generate_synthetic(cfg, grid);

    optimizer::DesignSpec spec;
    spec.grid = grid;
    spec.internal_model = mean_impulse(set);
    spec.weight = sigproc::butterworth_bandpass_weight(grid, 8, 31.0, 40.0, 1000.0);
    spec.model = uncertainty::fit_models(grid, set.response_matrix(),
                                         uncertainty::ModelKind::norm_bounded);
    spec.num_taps = 16;
    const auto result = optimizer::solve(spec);
    REQUIRE(result.status != optimizer::SolveStatus::infeasible);

    ControllerFile file;
    file.q = result.design.w;
    file.internal_model = spec.internal_model;
    file.sample_rate = grid.sample_rate;
    file.model_kind = "norm_bounded";
    file.status = "converged";
    file.seed = cfg.rng_seed;
    file.iterations = result.iterations;
    file.final_loss = result.design.loss;
    file.num_bins = grid.size();

    const std::string p1 = tmpdir + "/ctl1.json";
    const std::string p2 = tmpdir + "/ctl2.json";
    export_controller(file, p1);
    const auto back = import_controller(p1);
    CHECK(back.q == file.q);
    CHECK(back.internal_model == file.internal_model);
    CHECK(back.sample_rate == file.sample_rate);
    CHECK(back.model_kind == file.model_kind);
    CHECK(back.final_loss == file.final_loss);
    CHECK(back.num_bins == file.num_bins);
    export_controller(back, p2);
    CHECK(slurp(p1) == slurp(p2));

    // schema version is stamped in the file
    const auto j = nlohmann::json::parse(slurp(p1));
    CHECK(j.at("version").get<std::string>() == "1");

    // the stored design parameters suffice to recompute the recorded loss
    optimizer::DesignSpec re;
    re.grid = FrequencyGrid::linspaced(back.sample_rate, back.num_bins);
    re.internal_model = back.internal_model;
    re.weight = sigproc::butterworth_bandpass_weight(re.grid, back.weight_order,
                                                     back.weight_peak_db, back.weight_f_lo,
                                                     back.weight_f_hi);
    re.model = spec.model;
    re.num_taps = back.q.size();
    const double L = optimizer::loss_and_gradient(back.q, re).first;
    CHECK(std::abs(L - back.final_loss) <= 1e-10 * std::max(1.0, std::abs(back.final_loss)));
}

TEST_CASE("malformed inputs are rejected") {
    DirGuard guard;
    CHECK_THROWS_AS(load_observations(tmpdir + "/missing.json"), config_error);

    const std::string path = tmpdir + "/bad.json";
    std::ofstream(path) << "{\"version\":\"0\",\"observations\":[]}";
    CHECK_THROWS_AS(load_observations(path), config_error);

    std::ofstream(path) << "not json at all{{{";
    CHECK_THROWS_AS(load_observations(path), config_error);
}
