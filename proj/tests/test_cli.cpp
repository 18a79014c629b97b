#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "anckit/geometry.hpp"
#include "anckit/uncertainty.hpp"

namespace fs = std::filesystem;

namespace {

const std::string dir = "/tmp/anckit_cli_test";

std::string cli() {
    const char* p = std::getenv("ANCKIT_CLI");
    REQUIRE(p != nullptr);
    return p;
}

int run(const std::string& args) {
    const std::string cmd = cli() + " " + args + " >" + dir + "/out.log 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const std::string gen_small =
    "generate --bins 64 --impulse-length 512 --normal 4 --loose 2 --tight 2";

struct DirGuard {
    DirGuard() {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
};

}  // namespace

TEST_CASE("generate is deterministic and echoes its config") {
    DirGuard guard;
    CHECK(run(gen_small + " --out " + dir + "/a.json") == 0);
    CHECK(run(gen_small + " --out " + dir + "/b.json") == 0);
    CHECK(slurp(dir + "/a.json") == slurp(dir + "/b.json"));

    const auto echo = nlohmann::json::parse(slurp(dir + "/a.json.config.json"));
    CHECK(echo.at("subcommand") == "generate");
    CHECK(echo.at("options").at("bins") == 64);
    CHECK(echo.at("options").at("seed") == 7);
}

TEST_CASE("usage errors exit with code 2") {
    DirGuard guard;
    CHECK(run("fit") == 2);                      // missing required flag
    CHECK(run("frobnicate") == 2);               // unknown subcommand
    CHECK(run("") == 2);                         // no subcommand
    CHECK(run("verify --controller " + dir + "/nope.json --observations " + dir +
              "/nope.json --model " + dir + "/nope.json") == 2);

    REQUIRE(run(gen_small + " --out " + dir + "/obs.json") == 0);
    CHECK(run("fit --observations " + dir + "/obs.json --kind pentagon --out " + dir +
              "/m.json") == 2);
}

TEST_CASE("single-observation fit degenerates to zero-radius disks") {
    DirGuard guard;
    REQUIRE(run("generate --bins 32 --impulse-length 256 --normal 1 --loose 0 --tight 0 --out " +
                dir + "/one.json") == 0);
    REQUIRE(run("fit --observations " + dir + "/one.json --kind norm_bounded --out " + dir +
                "/one_model.json") == 0);
    const auto model = anckit::uncertainty::load_model(dir + "/one_model.json");
    for (const auto& bin : model.bins) {
        const auto* disk = std::get_if<anckit::geometry::Disk>(&bin);
        REQUIRE(disk != nullptr);
        CHECK(disk->radius <= 1e-12);
    }
    CHECK(fs::exists(dir + "/one_model.json.areas.csv"));
}

TEST_CASE("full pipeline with config replay") {
    DirGuard guard;
    REQUIRE(run(gen_small + " --out " + dir + "/obs.json") == 0);
    REQUIRE(run("fit --observations " + dir + "/obs.json --kind norm_bounded --out " + dir +
                "/model.json") == 0);
    REQUIRE(run("design --observations " + dir + "/obs.json --model " + dir +
                "/model.json --taps 16 --out " + dir + "/ctl.json") == 0);
    REQUIRE(run("verify --controller " + dir + "/ctl.json --observations " + dir +
                "/obs.json --model " + dir + "/model.json --out-dir " + dir + "/report") == 0);
    CHECK(fs::exists(dir + "/report/report.csv"));
    CHECK(fs::exists(dir + "/report/sensitivity.svg"));
    CHECK(fs::exists(dir + "/report/config.json"));

    // replaying the echoed design config reproduces the controller bitwise
    REQUIRE(run("--from-config " + dir + "/ctl.json.config.json --out " + dir + "/ctl2.json") ==
            0);
    CHECK(slurp(dir + "/ctl.json") == slurp(dir + "/ctl2.json"));
}
