#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "frontlab/config.hpp"
#include "frontlab/errors.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace frontlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("frontlab_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("config parsing") {
    SUBCASE("a full config round-trips through the resolved echo") {
        std::string text = R"({
            "kernel": {"family": "uniform", "params": {"a": -1.0, "b": 1.0}, "h": 0.01},
            "nonlinearity": {"family": "logistic", "params": {"r": 1.0}},
            "profile": {"c": 1.2, "theta": 1e-6, "grid": {"h": 0.02, "r": 40.0, "R": 40.0}},
            "out_dir": "somewhere", "seed": 7, "workers": 1
        })";
        auto cfg = parse_config_text(text);
        CHECK(cfg.kernel.tag == KernelTag::Uniform);
        CHECK(cfg.kernel_h == 0.01);
        CHECK(*cfg.profile.c == 1.2);
        CHECK(cfg.profile.grid_r == 40.0);
        CHECK(cfg.seed == 7);
        auto echoed = parse_config_text(config_to_json(cfg));
        CHECK(echoed.profile.grid_r == cfg.profile.grid_r);
        CHECK(echoed.kernel_h == cfg.kernel_h);
        CHECK(*echoed.profile.c == *cfg.profile.c);
    }
    SUBCASE("unknown keys are rejected at every level") {
        CHECK_THROWS_AS(parse_config_text(R"({"bogus": 1})"), ConfigError);
        CHECK_THROWS_AS(
            parse_config_text(R"({"kernel": {"family": "uniform", "params": {"a": 0, "b": 1, "q": 2}}})"),
            ConfigError);
        CHECK_THROWS_AS(
            parse_config_text(R"({"profile": {"speed": 1.0}})"), ConfigError);
    }
    SUBCASE("invalid JSON and invalid values are config errors") {
        CHECK_THROWS_AS(parse_config_text("{"), ConfigError);
        CHECK_THROWS_AS(
            parse_config_text(R"({"kernel": {"family": "uniform", "params": {"a": 2, "b": 1}}})"),
            ConfigError);
        CHECK_THROWS_AS(
            parse_config_text(R"({"kernel": {"family": "algebraic", "params": {"p": 0.5}}})"),
            ConfigError);
        CHECK_THROWS_AS(parse_config_text(R"({"workers": 0})"), ConfigError);
    }
    SUBCASE("mixture kernels parse") {
        auto cfg = parse_config_text(R"({
            "kernel": {"family": "mixture", "h": 0.01, "params": {"components": [
                {"family": "bump", "weight": 0.15, "params": {"center": -0.5, "width": 0.4}},
                {"family": "bump", "weight": 0.85, "params": {"center": 2.0, "width": 1.0}}
            ]}}
        })");
        CHECK(cfg.kernel.tag == KernelTag::Mixture);
        CHECK(cfg.kernel.components.size() == 2);
    }
}

TEST_CASE("speed command writes consistent artifacts") {
    auto dir = temp_dir("speed");
    ExperimentConfig cfg;
    cfg.kernel = KernelFamily::uniform(-1, 1);
    cfg.kernel_h = 0.002;
    cfg.out_dir = dir.string();
    REQUIRE(run_command("speed", cfg) == 0);

    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "dispersion_curve.csv"));
    CHECK(fs::exists(dir / "kernel.csv"));
    auto summary = slurp(dir / "speed.json");
    CHECK(summary.find("\"c1\"") != std::string::npos);
    // the summary value 0.90526... is the curve minimum: derivable from the CSV
    CHECK(summary.find("0.90526") != std::string::npos);

    // every curve entry in the CSV dominates the reported minimum
    std::ifstream csv(dir / "dispersion_curve.csv");
    std::string line;
    std::getline(csv, line); // header
    double min_c = 1e300;
    while (std::getline(csv, line)) {
        auto comma = line.find(',');
        min_c = std::min(min_c, std::stod(line.substr(comma + 1)));
    }
    // the refined minimizer is inserted into the CSV, so the summary minimum
    // is literally present in it
    CHECK(min_c >= 0.90526);
    CHECK(min_c <= 0.90527);
}

TEST_CASE("reruns reproduce artifacts bitwise") {
    auto d1 = temp_dir("rep1");
    auto d2 = temp_dir("rep2");
    ExperimentConfig cfg;
    cfg.kernel = KernelFamily::uniform(-1, 1);
    cfg.kernel_h = 0.01;
    cfg.out_dir = d1.string();
    REQUIRE(run_command("speed", cfg) == 0);
    cfg.out_dir = d2.string();
    REQUIRE(run_command("speed", cfg) == 0);
    CHECK(slurp(d1 / "dispersion_curve.csv") == slurp(d2 / "dispersion_curve.csv"));
    CHECK(slurp(d1 / "speed.json") == slurp(d2 / "speed.json"));
    CHECK(slurp(d1 / "kernel.csv") == slurp(d2 / "kernel.csv"));
}

TEST_CASE("numerical failure paths surface with the right error types") {
    SUBCASE("fat-tailed kernel cannot produce a finite speed") {
        ExperimentConfig cfg;
        cfg.kernel = KernelFamily::algebraic_tail(3.0);
        cfg.kernel_h = 0.05;
        cfg.out_dir = temp_dir("mollison").string();
        CHECK_THROWS_AS(run_command("speed", cfg), NumericalError);
    }
    SUBCASE("profile below the minimal speed reports nonexistence") {
        ExperimentConfig cfg;
        cfg.kernel = KernelFamily::uniform(-1, 1);
        cfg.kernel_h = 0.04;
        cfg.profile.c = 0.45; // c1 is about 0.905
        cfg.profile.grid_h = 0.04;
        cfg.profile.grid_r = 32;
        cfg.profile.grid_R = 32;
        cfg.out_dir = temp_dir("nonexist").string();
        CHECK_THROWS_AS(run_command("profile", cfg), NumericalError);
    }
    SUBCASE("unknown command is a config error") {
        ExperimentConfig cfg;
        cfg.out_dir = temp_dir("unknown").string();
        CHECK_THROWS_AS(run_command("definitely-not-a-command", cfg), ConfigError);
    }
}

TEST_CASE("FRONTLAB_OUT overrides the output directory") {
    auto dir = temp_dir("envout");
    setenv("FRONTLAB_OUT", dir.c_str(), 1);
    ExperimentConfig cfg;
    cfg.kernel = KernelFamily::uniform(-1, 1);
    cfg.kernel_h = 0.01;
    cfg.out_dir = (dir / "ignored").string();
    REQUIRE(run_command("speed", cfg) == 0);
    unsetenv("FRONTLAB_OUT");
    CHECK(fs::exists(dir / "speed.json"));
    CHECK_FALSE(fs::exists(dir / "ignored" / "speed.json"));
}
