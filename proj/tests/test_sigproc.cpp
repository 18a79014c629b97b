#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "anckit/sigproc.hpp"

using namespace anckit;

TEST_CASE("default grid layout excludes both endpoints") {
    const auto g = FrequencyGrid::linspaced(48000.0, 7);
    REQUIRE(g.size() == 7);
    for (std::size_t k = 0; k < 7; ++k)
        CHECK(g.bins[k] == doctest::Approx(M_PI * double(k + 1) / 8.0).epsilon(1e-15));
    CHECK(g.bins.front() > 0.0);
    CHECK(g.bins.back() < M_PI);
    CHECK_THROWS_AS(FrequencyGrid::linspaced(0.0, 4), config_error);
    CHECK_THROWS_AS(FrequencyGrid::linspaced(48000.0, 0), config_error);
}

TEST_CASE("evaluate_fir identity and delay") {
    const auto grid = FrequencyGrid::linspaced(48000.0, 16);
    FirFilter imp{{1.0, 0.0, 0.0}, 48000.0};
    for (const cplx& v : sigproc::evaluate_fir(imp, grid))
        CHECK(std::abs(v - 1.0) < 1e-15);

    FirFilter delay{{0.0, 1.0}, 48000.0};
    const auto resp = sigproc::evaluate_fir(delay, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(std::abs(resp[k] - std::polar(1.0, -grid.bins[k])) < 1e-15);
        CHECK(std::abs(resp[k]) == doctest::Approx(1.0).epsilon(1e-14));
    }

    FirFilter bad{{1.0}, 44100.0};
    CHECK_THROWS_AS(sigproc::evaluate_fir(bad, grid), config_error);
}

TEST_CASE("evaluate_fir matches a naive double-loop DFT") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto grid = FrequencyGrid::linspaced(48000.0, 16);
    FirFilter f{{}, 48000.0};
    for (int n = 0; n < 8; ++n) f.coefficients.push_back(u(rng));
    const auto got = sigproc::evaluate_fir(f, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        cplx ref = 0.0;
        for (std::size_t n = 0; n < f.coefficients.size(); ++n)
            ref += f.coefficients[n] * std::polar(1.0, -double(n) * grid.bins[k]);
        CHECK(std::abs(got[k] - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("evaluate is linear and conjugate-symmetric") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> w1(10), w2(10), mix(10);
    for (int n = 0; n < 10; ++n) {
        w1[n] = u(rng);
        w2[n] = u(rng);
        mix[n] = 0.7 * w1[n] - 1.3 * w2[n];
    }
    const std::vector<double> bins{0.3, 1.1, 2.5};
    const auto a = sigproc::evaluate_coeffs(w1, bins);
    const auto b = sigproc::evaluate_coeffs(w2, bins);
    const auto m = sigproc::evaluate_coeffs(mix, bins);
    for (std::size_t k = 0; k < bins.size(); ++k)
        CHECK(std::abs(m[k] - (0.7 * a[k] - 1.3 * b[k])) < 1e-12);

    std::vector<double> mirrored;
    for (double w : bins) mirrored.push_back(2.0 * M_PI - w);
    const auto c = sigproc::evaluate_coeffs(w1, mirrored);
    for (std::size_t k = 0; k < bins.size(); ++k)
        CHECK(std::abs(c[k] - std::conj(a[k])) < 1e-12);
}

TEST_CASE("butterworth weight hits the published peak and crossovers") {
    const auto grid = FrequencyGrid::linspaced(48000.0, 4096);
    const auto w = sigproc::butterworth_bandpass_weight(grid, 8, 31.0, 40.0, 1000.0);
    REQUIRE(w.magnitudes.size() == grid.size());

    const double gp = mag_from_db(31.0);
    const double f0 = std::sqrt(40.0 * 1000.0);

    // evaluate the closed form at the exact crossover/peak frequencies via a
    // single-bin scratch grid
    auto at = [&](double f_hz) {
        FrequencyGrid g1 = grid;
        g1.bins = {2.0 * M_PI * f_hz / 48000.0};
        return sigproc::butterworth_bandpass_weight(g1, 8, 31.0, 40.0, 1000.0).magnitudes[0];
    };
    CHECK(at(f0) == doctest::Approx(gp).epsilon(1e-12));
    CHECK(at(40.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(at(1000.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(at(10000.0) < 1e-3 * gp);

    // unimodal across the grid with max at f0
    std::size_t peak = 0;
    for (std::size_t k = 1; k < w.magnitudes.size(); ++k)
        if (w.magnitudes[k] > w.magnitudes[peak]) peak = k;
    CHECK(std::abs(grid.freq_hz(peak) - f0) < 48000.0 / 4096.0);
    for (std::size_t k = 1; k < peak; ++k) CHECK(w.magnitudes[k] >= w.magnitudes[k - 1] - 1e-12);
    for (std::size_t k = peak + 1; k < w.magnitudes.size(); ++k)
        CHECK(w.magnitudes[k] <= w.magnitudes[k - 1] + 1e-12);

    CHECK_THROWS_AS(sigproc::butterworth_bandpass_weight(grid, 7, 31.0, 40.0, 1000.0),
                    config_error);
    CHECK_THROWS_AS(sigproc::butterworth_bandpass_weight(grid, 8, 31.0, 40.0, 24000.0),
                    config_error);
}

TEST_CASE("waterbed functional closed forms") {
    // S == 1 -> 0 exactly
    CHECK(sigproc::waterbed_functional(std::vector<cplx>(64, cplx(1.0))) == 0.0);

    // minimum phase S(z) = 1 - 0.5 z^-1 -> 0
    const auto s1 = sigproc::full_circle_response({1.0, -0.5}, 1 << 14);
    CHECK(std::abs(sigproc::waterbed_functional(s1)) < 1e-12);

    // S(z) = 1 - 2 z^-1 -> ln 2
    const auto s2 = sigproc::full_circle_response({1.0, -2.0}, 1 << 14);
    CHECK(sigproc::waterbed_functional(s2) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    CHECK_THROWS_AS(sigproc::waterbed_functional({}), config_error);
    CHECK(std::isinf(sigproc::waterbed_functional({cplx(0.0)})));
}

TEST_CASE("waterbed nonnegativity for delayed internal models") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> q(16), ghat(12, 0.0);
        for (double& v : q) v = u(rng);
        for (std::size_t n = 1; n < ghat.size(); ++n) ghat[n] = u(rng);
        CHECK(sigproc::waterbed_of_design(q, ghat, 512) >= -1e-6);
    }
}

TEST_CASE("octave smoothing basics") {
    const auto grid = FrequencyGrid::linspaced(48000.0, 256);
    const std::vector<double> flat(256, -3.5);
    const auto sf = sigproc::octave_smooth(flat, grid, 6.0);
    for (double v : sf) CHECK(v == doctest::Approx(-3.5).epsilon(1e-12));

    std::vector<double> spike(256, 0.0);
    spike[128] = 12.0;
    const auto ss = sigproc::octave_smooth(spike, grid, 6.0);
    CHECK(ss[128] < 12.0);
    CHECK(ss[128] > 0.0);

    // linear-in-log-f ramp passes through untouched away from the edges
    std::vector<double> ramp(256);
    for (std::size_t k = 0; k < 256; ++k) ramp[k] = 4.0 * std::log(grid.freq_hz(k));
    const auto sr = sigproc::octave_smooth(ramp, grid, 6.0);
    for (std::size_t k = 64; k < 224; ++k)
        CHECK(sr[k] == doctest::Approx(ramp[k]).epsilon(1e-6));

    CHECK_THROWS_AS(sigproc::octave_smooth(flat, grid, 0.0), config_error);
}
