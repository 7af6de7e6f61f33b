#ifndef FRONTLAB_CONFIG_HPP
#define FRONTLAB_CONFIG_HPP

#include "frontlab/kernels.hpp"
#include "frontlab/nonlinearity.hpp"

#include <optional>
#include <string>
#include <vector>

namespace frontlab {

struct ProfileCommand {
    std::optional<double> c;
    bool find_min_speed = false;
    std::vector<double> eps_schedule; // empty: default 0.1 * 2^-k, then 0
    double theta = 1e-7;
    double grid_h = 0.02;
    double grid_r = 60;
    double grid_R = 60;
};

struct EvolveCommand {
    double T = 100;
    double dt = 0; // 0: stability policy
    double h = 0.05;
    double window_left = -150;
    double window_right = 50;
    double save_every = 0;
    double track_level = 0.5;
    double track_every = 0.5;
};

struct DemoNonuniqueCommand {
    double h = 0.01;
    double grid_r = 30;
    double grid_R = 14;
    std::vector<int> levels = {8, 16, 32, 64};
    int pin_sweep = 5;
};

struct CheckLimitCommand {
    std::vector<double> eps = {0.4, 0.2, 0.1, 0.05};
    std::string test_function = "gaussian"; // or "tanh"
};

struct CheckSupersolutionCommand {
    double lambda = 1.0;
    double delta = 0.5;
    double N = 4.0;
};

// Fully resolved experiment description. Parsed strictly: unknown keys are
// rejected so a typo cannot silently change a run.
struct ExperimentConfig {
    KernelFamily kernel = KernelFamily::uniform(-1, 1);
    double kernel_h = 0.02;

    std::string nonlinearity_family = "logistic";
    std::vector<double> nl_params = {1.0}; // family-specific scalars
    std::vector<double> spline_u, spline_f;
    std::optional<double> spline_slope0, spline_slope1;
    std::optional<HolderData> holder;

    ProfileCommand profile;
    EvolveCommand evolve;
    DemoNonuniqueCommand demo;
    CheckLimitCommand check_limit;
    CheckSupersolutionCommand check_supersolution;

    std::string out_dir = "out";
    long seed = 0;
    int workers = 1;
    double solver_tol = 1e-10;

    Nonlinearity make_nonlinearity() const;
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg); // resolved echo

// Dispatch for the CLI subcommands: speed, profile, evolve, demo-nonunique,
// check-limit, check-supersolution. Writes artifacts and the run manifest
// into cfg.out_dir. Returns 0 on success; ConfigError maps to exit 2,
// NumericalError to 3, InvariantError to 4 in the binary.
int run_command(const std::string& command, const ExperimentConfig& cfg);

extern const char* const kVersion;

} // namespace frontlab

#endif
