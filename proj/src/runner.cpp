#include "frontlab/config.hpp"
#include "frontlab/dispersion.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/evolution.hpp"
#include "frontlab/nonunique.hpp"
#include "frontlab/profile_solver.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace frontlab {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw NumericalError("cannot write " + path.string());
    out << text;
}

void write_manifest(const ExperimentConfig& cfg, const std::string& command,
                    const fs::path& dir) {
    json j;
    j["tool"] = "frontlab";
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = json::parse(config_to_json(cfg));
    write_text(dir / "manifest.json", j.dump(2) + "\n");
}

fs::path prepare_out_dir(const ExperimentConfig& cfg) {
    std::string dir = cfg.out_dir;
    if (const char* env = std::getenv("FRONTLAB_OUT")) dir = env;
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw ConfigError("cannot create output directory " + p.string());
    return p;
}

void write_curve_csv(const fs::path& path, const DispersionCurve& curve) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw NumericalError("cannot open " + path.string());
    std::fprintf(fp, "lambda,c_of_lambda\n");
    for (std::size_t i = 0; i < curve.lambda.size(); ++i)
        std::fprintf(fp, "%.17g,%.17g\n", curve.lambda[i], curve.c[i]);
    std::fclose(fp);
}

void insert_minimizer(DispersionCurve& curve, const SpeedResult& res) {
    if (!res.lambda_star) return;
    auto it = std::lower_bound(curve.lambda.begin(), curve.lambda.end(), *res.lambda_star);
    auto idx = static_cast<std::size_t>(it - curve.lambda.begin());
    curve.lambda.insert(it, *res.lambda_star);
    curve.c.insert(curve.c.begin() + static_cast<long>(idx), res.speed);
}

int run_speed(const ExperimentConfig& cfg, const fs::path& dir) {
    auto kernel = build_kernel(cfg.kernel, cfg.kernel_h);
    auto f = cfg.make_nonlinearity();
    auto left = c1(kernel, f);
    auto right = c_star_left(kernel, f);

    // the refined minimizer joins the sampled curve so the summary values are
    // contained in the CSV
    insert_minimizer(left.curve, left);
    insert_minimizer(right.curve, right);
    write_curve_csv(dir / "dispersion_curve.csv", left.curve);
    write_curve_csv(dir / "dispersion_curve_rightward.csv", right.curve);
    kernel.dump_csv((dir / "kernel.csv").string());

    json j;
    j["c1"] = left.speed;
    j["c_star"] = right.speed;
    if (left.lambda_star) j["lambda_star"] = *left.lambda_star;
    j["attained"] = left.attained;
    j["lambda_max"] = left.lambda_max;
    j["curve_csv_path"] = "dispersion_curve.csv";
    if (!left.warning.empty()) j["warning"] = left.warning;
    write_text(dir / "speed.json", j.dump(2) + "\n");
    return 0;
}

int run_profile(const ExperimentConfig& cfg, const fs::path& dir) {
    Grid grid{cfg.profile.grid_h, cfg.profile.grid_r, cfg.profile.grid_R};
    auto kernel = build_kernel(cfg.kernel, grid.h);
    auto f = cfg.make_nonlinearity();
    SolveConfig scfg;
    scfg.tol = cfg.solver_tol;

    if (cfg.profile.find_min_speed) {
        Grid sgrid{grid.h, std::min(grid.r, 8.0), std::min(grid.R, 8.0)};
        auto ms = minimal_speed_monostable(kernel, f, sgrid, 1e-6, {}, scfg);
        std::FILE* fp = std::fopen((dir / "c_theta.csv").c_str(), "w");
        if (!fp) throw NumericalError("cannot open c_theta.csv");
        std::fprintf(fp, "theta,c_theta\n");
        for (std::size_t i = 0; i < ms.thetas.size(); ++i)
            std::fprintf(fp, "%.17g,%.17g\n", ms.thetas[i], ms.c_thetas[i]);
        std::fclose(fp);
        json j;
        j["c_star"] = ms.c_star;
        j["theta_csv_path"] = "c_theta.csv";
        write_text(dir / "min_speed.json", j.dump(2) + "\n");
        return 0;
    }

    if (!cfg.profile.c) throw ConfigError("profile needs --c or --find-min-speed");
    double c = *cfg.profile.c;

    auto ext = extend_domain(kernel, f, grid, c, cfg.profile.theta, 2, scfg,
                             cfg.profile.eps_schedule);
    if (!ext.converged)
        throw NumericalError("no traveling front at this speed: " + ext.diagnosis);

    double res = residual(ext.profile, kernel, f);
    auto fit = tail_fit(ext.profile, kernel, f, c);
    if (!ext.profile.monotone(1e-10))
        throw InvariantError("converged profile lost monotonicity");
    if (res > 1e-4) throw InvariantError("converged profile residual above 1e-4");

    ext.profile.dump_csv((dir / "profile.csv").string());
    json rep;
    rep["aligned_extension_history"] = ext.aligned_history;
    rep["continuation_aligned_steps"] = ext.continuation_steps;
    rep["iterations"] = ext.final_report.iterations;
    rep["final_change"] = ext.final_report.final_change;
    rep["ordering_checked"] = ext.final_report.ordering_checked;
    rep["monotone_iterates"] = ext.final_report.monotone_iterates;
    rep["change_decays_after_transient"] = ext.final_report.change_decays_after_transient;
    rep["centered_polish_applied"] = ext.final_report.centered_polish_applied;
    rep["centered_polish_rejected"] = ext.final_report.centered_polish_rejected;
    {
        const auto& hist = ext.final_report.change_history;
        std::size_t tail = std::min<std::size_t>(hist.size(), 50);
        rep["change_history_tail"] =
            std::vector<double>(hist.end() - static_cast<long>(tail), hist.end());
    }
    write_text(dir / "iteration_report.json", rep.dump(2) + "\n");

    json diag;
    diag["residual"] = res;
    diag["lambda_hat"] = fit.lambda_hat;
    diag["lambda_of_c"] = fit.lambda_of_c_value;
    diag["log_corrected"] = fit.log_corrected;
    diag["fit_r2"] = fit.fit_r2;
    diag["smoothness_warning"] = fit.smoothness_warning;
    diag["endpoint_values"] = {ext.profile.u.front(), ext.profile.u.back()};
    write_text(dir / "diagnostics.json", diag.dump(2) + "\n");
    return 0;
}

int run_evolve(const ExperimentConfig& cfg, const fs::path& dir) {
    double window_width = cfg.evolve.window_right - cfg.evolve.window_left;
    auto kernel = cfg.kernel.compact_support()
                      ? build_kernel(cfg.kernel, cfg.evolve.h)
                      : build_kernel(cfg.kernel, cfg.evolve.h, window_width, 100.0);
    auto f = cfg.make_nonlinearity();
    Stepper stepper(kernel, f);

    EvolveParams p;
    p.T = cfg.evolve.T;
    p.dt = cfg.evolve.dt;
    p.window_left = cfg.evolve.window_left;
    p.window_right = cfg.evolve.window_right;
    p.track_level = cfg.evolve.track_level;
    p.track_every = cfg.evolve.track_every;
    p.save_every = cfg.evolve.save_every;
    p.front_x0 = 0.5 * (cfg.evolve.window_left + cfg.evolve.window_right);
    auto res = run_evolution(stepper, p);

    std::FILE* fp = std::fopen((dir / "track.csv").c_str(), "w");
    if (!fp) throw NumericalError("cannot open track.csv");
    std::fprintf(fp, "t,x_front\n");
    for (std::size_t i = 0; i < res.track.times.size(); ++i)
        std::fprintf(fp, "%.17g,%.17g\n", res.track.times[i], res.track.positions[i]);
    std::fclose(fp);

    if (!res.frames.empty()) {
        fp = std::fopen((dir / "frames.csv").c_str(), "w");
        if (!fp) throw NumericalError("cannot open frames.csv");
        std::fprintf(fp, "t,x,U\n");
        for (std::size_t k = 0; k < res.frames.size(); ++k) {
            double t = res.frames[k].first;
            double xl = res.frame_axis[k].first, hh = res.frame_axis[k].second;
            const auto& U = res.frames[k].second;
            for (std::size_t i = 0; i < U.size(); ++i)
                std::fprintf(fp, "%.17g,%.17g,%.17g\n", t, xl + i * hh, U[i]);
        }
        std::fclose(fp);
    }

    json j;
    j["measured_speed"] = res.measured_speed;
    j["fit_residual"] = res.fit_residual;
    j["accelerating"] = res.accelerating;
    j["speed_ratio"] = res.speed_ratio;
    write_text(dir / "summary.json", j.dump(2) + "\n");
    return 0;
}

int run_demo_nonunique(const ExperimentConfig& cfg, const fs::path& dir) {
    auto cs = build_nonunique_case(cfg.demo.h);
    auto kernel = build_kernel(cs.family, cfg.demo.h);
    Grid grid{cfg.demo.h, cfg.demo.grid_r, cfg.demo.grid_R};

    if (cfg.demo.levels.size() < 4)
        throw ConfigError("demo needs at least 4 regularization levels");
    std::vector<Profile> levels;
    for (int n : cfg.demo.levels) {
        RegularizedG gn(cs.f, cs.g_info, n);
        auto sol = solve_regularized(kernel, gn, grid, cs.g_info.a, cfg.solver_tol);
        char name[64];
        std::snprintf(name, sizeof name, "level_n%d.csv", n);
        sol.profile.dump_csv((dir / name).string());
        levels.push_back(sol.profile);
    }
    RegularizedG finest(cs.f, cs.g_info, cfg.demo.levels.back());
    auto lim = extract_discontinuous_limit(levels, kernel, finest, cs.g_info);
    lim.limit.dump_csv((dir / "limit.csv").string());
    lim.extrapolant.dump_csv((dir / "extrapolant.csv").string());

    // exploratory: the same limit re-pinned across the jump interval
    json sweep = json::array();
    for (int k = 1; k <= cfg.demo.pin_sweep; ++k) {
        double ap = cs.g_info.a +
                    (cs.g_info.b - cs.g_info.a) * k / (cfg.demo.pin_sweep + 1.0);
        Profile shifted = lim.limit;
        try {
            shifted.x_offset = 0;
            shifted.x_offset = -shifted.level_crossing(ap);
            sweep.push_back({{"pin", ap},
                             {"value_at_zero", shifted.value_at(0.0)},
                             {"residual_offjump", lim.residual_offjump}});
        } catch (const NumericalError&) {
            sweep.push_back({{"pin", ap}, {"error", "no crossing"}});
        }
    }

    json j;
    j["a"] = cs.g_info.a;
    j["b"] = cs.g_info.b;
    j["jump_left"] = lim.jump_left;
    j["jump_right"] = lim.jump_right;
    j["jump_size"] = lim.jump_size;
    j["residual_offjump"] = lim.residual_offjump;
    j["c1"] = cs.c1_value;
    j["conv_max_increment"] = lim.conv_max_increment;
    j["conv_increment_bound"] = lim.conv_increment_bound;
    j["conv_continuous_ok"] = lim.conv_continuous_ok;
    j["separation_ok"] = lim.separation_ok;
    j["refinement_distance"] = lim.refinement_distance;
    j["pin_sweep_exploratory"] = sweep;
    write_text(dir / "certificate.json", j.dump(2) + "\n");

    if (!lim.separation_ok) throw InvariantError("jump separation certificate failed");
    if (lim.residual_offjump > 1e-4)
        throw InvariantError("off-jump stationary residual certificate failed");
    if (!lim.conv_continuous_ok)
        throw InvariantError("continuity certificate for J*u failed");
    return 0;
}

int run_check_limit(const ExperimentConfig& cfg, const fs::path& dir) {
    double hk = std::min(cfg.kernel_h, 0.002);
    auto kernel = build_kernel(cfg.kernel, hk);
    TestFunction phi = cfg.check_limit.test_function == "tanh"
                           ? TestFunction::tanh_profile()
                           : TestFunction::gaussian_bump();

    std::FILE* fp = std::fopen((dir / "local_limit.csv").c_str(), "w");
    if (!fp) throw NumericalError("cannot open local_limit.csv");
    std::fprintf(fp, "eps,error,error_over_eps2\n");
    std::vector<double> scaled;
    for (double eps : cfg.check_limit.eps) {
        double err = local_limit_error(kernel, eps, phi);
        scaled.push_back(err / (eps * eps));
        std::fprintf(fp, "%.17g,%.17g,%.17g\n", eps, err, scaled.back());
    }
    std::fclose(fp);

    bool decreasing = true;
    for (std::size_t i = 0; i + 1 < scaled.size(); ++i)
        if (scaled[i + 1] >= scaled[i]) decreasing = false;

    json j;
    j["eps"] = cfg.check_limit.eps;
    j["error_over_eps2"] = scaled;
    j["monotone_decreasing"] = decreasing;
    write_text(dir / "local_limit.json", j.dump(2) + "\n");
    if (!decreasing)
        throw InvariantError("error/eps^2 failed to decrease along the eps schedule");
    return 0;
}

int run_check_supersolution(const ExperimentConfig& cfg, const fs::path& dir) {
    auto kernel = build_kernel(cfg.kernel, cfg.kernel_h);
    auto f = cfg.make_nonlinearity();
    auto w = build_supersolution(kernel, f, cfg.check_supersolution.lambda,
                                 cfg.check_supersolution.delta, cfg.check_supersolution.N);
    auto rep = verify_supersolution(w, w.kappa, kernel, f);

    std::FILE* fp = std::fopen((dir / "supersolution.csv").c_str(), "w");
    if (!fp) throw NumericalError("cannot open supersolution.csv");
    std::fprintf(fp, "x,w\n");
    double reach = w.N + kernel.sample_radius() + 10.0;
    for (int i = 0; i <= 4000; ++i) {
        double x = -reach + 2 * reach * i / 4000.0;
        std::fprintf(fp, "%.17g,%.17g\n", x, w.value(x));
    }
    std::fclose(fp);

    json j;
    j["kappa"] = w.kappa;
    j["kappa0"] = w.kappa0;
    j["kappa1"] = w.kappa1;
    j["kappa2"] = w.kappa2;
    j["kappa3"] = w.kappa3;
    j["ok"] = rep.ok;
    j["worst_violation"] = rep.worst_violation;
    j["location"] = rep.location;
    write_text(dir / "supersolution.json", j.dump(2) + "\n");
    if (!rep.ok) throw InvariantError("constructed supersolution failed verification");
    return 0;
}

} // namespace

int run_command(const std::string& command, const ExperimentConfig& cfg) {
    fs::path dir = prepare_out_dir(cfg);
    write_manifest(cfg, command, dir);
    if (command == "speed") return run_speed(cfg, dir);
    if (command == "profile") return run_profile(cfg, dir);
    if (command == "evolve") return run_evolve(cfg, dir);
    if (command == "demo-nonunique") return run_demo_nonunique(cfg, dir);
    if (command == "check-limit") return run_check_limit(cfg, dir);
    if (command == "check-supersolution") return run_check_supersolution(cfg, dir);
    throw ConfigError("unknown command \"" + command + "\"");
}

} // namespace frontlab
