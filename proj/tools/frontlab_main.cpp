#include "frontlab/config.hpp"
#include "frontlab/errors.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <optional>
#include <string>

using namespace frontlab;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON experiment configuration");
    cmd->add_option("--out", flags.out_dir, "output directory (overrides config)");
    cmd->add_option("--workers", flags.workers,
                    "cap internal parallelism; 1 guarantees determinism");
}

ExperimentConfig load(const CommonFlags& flags) {
    ExperimentConfig cfg;
    if (!flags.config_path.empty()) cfg = parse_config_file(flags.config_path);
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    if (flags.workers > 0) cfg.workers = flags.workers;
    return cfg;
}

int dispatch(const std::string& command, const ExperimentConfig& cfg) {
    try {
        return run_command(command, cfg);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const InvariantError& e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return 4;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"frontlab: traveling fronts for nonlocal dispersal equations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("frontlab ") + kVersion);
    app.set_help_flag("--help", "print help"); // long-only: --h is a grid flag

    CommonFlags flags;

    auto* speed = app.add_subcommand("speed", "dispersion relation and minimal speeds");
    add_common(speed, flags);

    auto* profile = app.add_subcommand("profile", "traveling-front profile pipeline");
    add_common(profile, flags);
    std::optional<double> c_flag;
    bool find_min = false;
    std::string grid_flag;
    std::optional<double> theta_flag;
    std::string eps_flag;
    profile->add_option("--c", c_flag, "front speed");
    profile->add_flag("--find-min-speed", find_min, "estimate the minimal speed instead");
    profile->add_option("--grid", grid_flag, "grid as \"h,r,R\"");
    profile->add_option("--theta", theta_flag, "left boundary anchor value");
    profile->add_option("--eps-schedule", eps_flag, "comma-separated viscosity schedule");

    auto* evolve = app.add_subcommand("evolve", "time-dependent front simulation");
    evolve->set_help_flag("--help", "print help");
    add_common(evolve, flags);
    std::optional<double> T_flag, dt_flag, h_flag, save_flag, level_flag;
    std::string window_flag;
    evolve->add_option("--T", T_flag, "final time");
    evolve->add_option("--dt", dt_flag, "time step (default: stability policy)");
    evolve->add_option("--h", h_flag, "grid spacing");
    evolve->add_option("--window", window_flag, "window as \"left,right\"");
    evolve->add_option("--save-every", save_flag, "time between saved frames");
    evolve->add_option("--track-level", level_flag, "tracked level crossing");

    auto* demo = app.add_subcommand("demo-nonunique", "discontinuous stationary fronts");
    add_common(demo, flags);

    auto* climit = app.add_subcommand("check-limit", "local diffusion limit expansion");
    add_common(climit, flags);

    auto* csuper = app.add_subcommand("check-supersolution", "exponential supersolution");
    add_common(csuper, flags);

    CLI11_PARSE(app, argc, argv);

    ExperimentConfig cfg;
    try {
        cfg = load(flags);
        if (profile->parsed()) {
            if (c_flag) cfg.profile.c = *c_flag;
            if (find_min) cfg.profile.find_min_speed = true;
            if (theta_flag) cfg.profile.theta = *theta_flag;
            if (!grid_flag.empty()) {
                double h, r, R;
                if (std::sscanf(grid_flag.c_str(), "%lf,%lf,%lf", &h, &r, &R) != 3)
                    throw ConfigError("--grid expects \"h,r,R\"");
                cfg.profile.grid_h = h;
                cfg.profile.grid_r = r;
                cfg.profile.grid_R = R;
            }
            if (!eps_flag.empty()) {
                cfg.profile.eps_schedule.clear();
                const char* s = eps_flag.c_str();
                char* end = nullptr;
                while (*s) {
                    double v = std::strtod(s, &end);
                    if (end == s) throw ConfigError("--eps-schedule expects numbers");
                    cfg.profile.eps_schedule.push_back(v);
                    s = (*end == ',') ? end + 1 : end;
                }
            }
        }
        if (evolve->parsed()) {
            if (T_flag) cfg.evolve.T = *T_flag;
            if (dt_flag) cfg.evolve.dt = *dt_flag;
            if (h_flag) cfg.evolve.h = *h_flag;
            if (save_flag) cfg.evolve.save_every = *save_flag;
            if (level_flag) cfg.evolve.track_level = *level_flag;
            if (!window_flag.empty()) {
                double l, r;
                if (std::sscanf(window_flag.c_str(), "%lf,%lf", &l, &r) != 2)
                    throw ConfigError("--window expects \"left,right\"");
                cfg.evolve.window_left = l;
                cfg.evolve.window_right = r;
            }
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    return dispatch(app.get_subcommands().front()->get_name(), cfg);
}
