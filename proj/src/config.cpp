#include "frontlab/config.hpp"
#include "frontlab/errors.hpp"

#include "json.hpp"

#include <fstream>
#include <set>

namespace frontlab {

const char* const kVersion = "0.1.0";

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
}

double need_number(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_number())
        throw ConfigError("missing numeric \"" + key + "\" in " + where);
    return obj[key].get<double>();
}

double opt_number(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError("\"" + key + "\" must be a number");
    return obj[key].get<double>();
}

KernelComponent parse_component(const json& j) {
    reject_unknown(j, {"family", "weight", "params"}, "kernel component");
    KernelComponent c;
    std::string fam = j.value("family", "");
    c.weight = opt_number(j, "weight", 1.0);
    const json& p = j.contains("params") ? j["params"] : json::object();
    if (fam == "uniform") {
        reject_unknown(p, {"a", "b"}, "uniform params");
        c.tag = KernelTag::Uniform;
        c.a = need_number(p, "a", "uniform params");
        c.b = need_number(p, "b", "uniform params");
    } else if (fam == "bump") {
        reject_unknown(p, {"center", "width"}, "bump params");
        c.tag = KernelTag::Bump;
        c.center = need_number(p, "center", "bump params");
        c.width = need_number(p, "width", "bump params");
    } else if (fam == "gaussian") {
        reject_unknown(p, {"mean", "sigma"}, "gaussian params");
        c.tag = KernelTag::Gaussian;
        c.mean = need_number(p, "mean", "gaussian params");
        c.sigma = need_number(p, "sigma", "gaussian params");
    } else {
        throw ConfigError("mixture components must be uniform, bump or gaussian");
    }
    return c;
}

KernelFamily parse_kernel(const json& j, double& h_out) {
    reject_unknown(j, {"family", "params", "h"}, "kernel");
    std::string fam = j.value("family", "");
    h_out = opt_number(j, "h", 0.02);
    const json& p = j.contains("params") ? j["params"] : json::object();
    if (fam == "uniform") {
        reject_unknown(p, {"a", "b"}, "kernel params");
        return KernelFamily::uniform(need_number(p, "a", "kernel"), need_number(p, "b", "kernel"));
    }
    if (fam == "bump") {
        reject_unknown(p, {"center", "width"}, "kernel params");
        return KernelFamily::bump(need_number(p, "center", "kernel"),
                                  need_number(p, "width", "kernel"));
    }
    if (fam == "gaussian") {
        reject_unknown(p, {"mean", "sigma"}, "kernel params");
        return KernelFamily::gaussian(need_number(p, "mean", "kernel"),
                                      need_number(p, "sigma", "kernel"));
    }
    if (fam == "algebraic") {
        reject_unknown(p, {"p"}, "kernel params");
        return KernelFamily::algebraic_tail(need_number(p, "p", "kernel"));
    }
    if (fam == "mixture") {
        reject_unknown(p, {"components"}, "kernel params");
        if (!p.contains("components") || !p["components"].is_array())
            throw ConfigError("mixture kernel needs a components array");
        std::vector<KernelComponent> comps;
        for (const auto& cj : p["components"]) comps.push_back(parse_component(cj));
        return KernelFamily::mixture(std::move(comps));
    }
    throw ConfigError("unknown kernel family \"" + fam + "\"");
}

std::vector<double> number_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ConfigError(where + " must contain numbers only");
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace

Nonlinearity ExperimentConfig::make_nonlinearity() const {
    Nonlinearity f;
    if (nonlinearity_family == "logistic") {
        if (nl_params.size() != 1) throw ConfigError("logistic takes params {r}");
        f = make_logistic(nl_params[0]);
    } else if (nonlinearity_family == "cubic") {
        if (nl_params.size() != 2) throw ConfigError("cubic takes params {r, a}");
        f = make_cubic(nl_params[0], nl_params[1]);
    } else if (nonlinearity_family == "ignition") {
        if (nl_params.size() != 2) throw ConfigError("ignition takes params {rho, amp}");
        f = make_ignition(nl_params[0], nl_params[1]);
    } else if (nonlinearity_family == "spline") {
        f = make_spline(spline_u, spline_f, spline_slope0, spline_slope1);
    } else {
        throw ConfigError("unknown nonlinearity family \"" + nonlinearity_family + "\"");
    }
    if (holder) f.holder = *holder;
    return f;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(j,
                   {"kernel", "nonlinearity", "speed", "profile", "evolve", "demo_nonunique",
                    "check_limit", "check_supersolution", "out_dir", "seed", "workers",
                    "tolerances"},
                   "config");
    ExperimentConfig cfg;
    if (j.contains("kernel")) cfg.kernel = parse_kernel(j["kernel"], cfg.kernel_h);

    if (j.contains("nonlinearity")) {
        const json& nj = j["nonlinearity"];
        reject_unknown(nj, {"family", "params", "holder"}, "nonlinearity");
        cfg.nonlinearity_family = nj.value("family", "logistic");
        cfg.nl_params.clear();
        if (nj.contains("params")) {
            const json& p = nj["params"];
            if (cfg.nonlinearity_family == "logistic") {
                reject_unknown(p, {"r"}, "nonlinearity params");
                cfg.nl_params = {need_number(p, "r", "logistic")};
            } else if (cfg.nonlinearity_family == "cubic") {
                reject_unknown(p, {"r", "a"}, "nonlinearity params");
                cfg.nl_params = {need_number(p, "r", "cubic"), need_number(p, "a", "cubic")};
            } else if (cfg.nonlinearity_family == "ignition") {
                reject_unknown(p, {"rho", "amp"}, "nonlinearity params");
                cfg.nl_params = {need_number(p, "rho", "ignition"),
                                 need_number(p, "amp", "ignition")};
            } else if (cfg.nonlinearity_family == "spline") {
                reject_unknown(p, {"u", "f", "slope0", "slope1"}, "nonlinearity params");
                cfg.spline_u = number_list(p["u"], "spline u");
                cfg.spline_f = number_list(p["f"], "spline f");
                if (p.contains("slope0")) cfg.spline_slope0 = p["slope0"].get<double>();
                if (p.contains("slope1")) cfg.spline_slope1 = p["slope1"].get<double>();
            } else {
                throw ConfigError("unknown nonlinearity family");
            }
        }
        if (nj.contains("holder")) {
            const json& hj = nj["holder"];
            reject_unknown(hj, {"A", "m", "delta", "gamma"}, "holder");
            HolderData hd;
            hd.A = opt_number(hj, "A", 1.0);
            hd.m = opt_number(hj, "m", 1.0);
            hd.delta = opt_number(hj, "delta", 0.1);
            hd.gamma = opt_number(hj, "gamma", 1.0);
            cfg.holder = hd;
        }
    }

    if (j.contains("speed")) reject_unknown(j["speed"], {}, "speed");

    if (j.contains("profile")) {
        const json& pj = j["profile"];
        reject_unknown(pj, {"c", "find_min_speed", "eps_schedule", "theta", "grid"}, "profile");
        if (pj.contains("c")) cfg.profile.c = pj["c"].get<double>();
        cfg.profile.find_min_speed = pj.value("find_min_speed", false);
        if (pj.contains("eps_schedule"))
            cfg.profile.eps_schedule = number_list(pj["eps_schedule"], "eps_schedule");
        cfg.profile.theta = opt_number(pj, "theta", cfg.profile.theta);
        if (pj.contains("grid")) {
            const json& gj = pj["grid"];
            reject_unknown(gj, {"h", "r", "R"}, "profile grid");
            cfg.profile.grid_h = opt_number(gj, "h", cfg.profile.grid_h);
            cfg.profile.grid_r = opt_number(gj, "r", cfg.profile.grid_r);
            cfg.profile.grid_R = opt_number(gj, "R", cfg.profile.grid_R);
        }
    }

    if (j.contains("evolve")) {
        const json& ej = j["evolve"];
        reject_unknown(ej,
                       {"T", "dt", "h", "window", "save_every", "track_level", "track_every"},
                       "evolve");
        cfg.evolve.T = opt_number(ej, "T", cfg.evolve.T);
        cfg.evolve.dt = opt_number(ej, "dt", cfg.evolve.dt);
        cfg.evolve.h = opt_number(ej, "h", cfg.evolve.h);
        if (ej.contains("window")) {
            auto w = number_list(ej["window"], "window");
            if (w.size() != 2) throw ConfigError("window must be [left, right]");
            cfg.evolve.window_left = w[0];
            cfg.evolve.window_right = w[1];
        }
        cfg.evolve.save_every = opt_number(ej, "save_every", cfg.evolve.save_every);
        cfg.evolve.track_level = opt_number(ej, "track_level", cfg.evolve.track_level);
        cfg.evolve.track_every = opt_number(ej, "track_every", cfg.evolve.track_every);
    }

    if (j.contains("demo_nonunique")) {
        const json& dj = j["demo_nonunique"];
        reject_unknown(dj, {"h", "grid", "levels", "pin_sweep"}, "demo_nonunique");
        cfg.demo.h = opt_number(dj, "h", cfg.demo.h);
        if (dj.contains("grid")) {
            const json& gj = dj["grid"];
            reject_unknown(gj, {"r", "R"}, "demo grid");
            cfg.demo.grid_r = opt_number(gj, "r", cfg.demo.grid_r);
            cfg.demo.grid_R = opt_number(gj, "R", cfg.demo.grid_R);
        }
        if (dj.contains("levels")) {
            cfg.demo.levels.clear();
            for (double v : number_list(dj["levels"], "levels"))
                cfg.demo.levels.push_back(static_cast<int>(v));
        }
        cfg.demo.pin_sweep = static_cast<int>(opt_number(dj, "pin_sweep", cfg.demo.pin_sweep));
    }

    if (j.contains("check_limit")) {
        const json& cj = j["check_limit"];
        reject_unknown(cj, {"eps", "test_function"}, "check_limit");
        if (cj.contains("eps")) cfg.check_limit.eps = number_list(cj["eps"], "eps");
        cfg.check_limit.test_function = cj.value("test_function", cfg.check_limit.test_function);
    }

    if (j.contains("check_supersolution")) {
        const json& cj = j["check_supersolution"];
        reject_unknown(cj, {"lambda", "delta", "N"}, "check_supersolution");
        cfg.check_supersolution.lambda = opt_number(cj, "lambda", 1.0);
        cfg.check_supersolution.delta = opt_number(cj, "delta", 0.5);
        cfg.check_supersolution.N = opt_number(cj, "N", 4.0);
    }

    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<long>();
    if (j.contains("workers")) {
        cfg.workers = j["workers"].get<int>();
        if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
    }
    if (j.contains("tolerances")) {
        const json& tj = j["tolerances"];
        reject_unknown(tj, {"solver_tol"}, "tolerances");
        cfg.solver_tol = opt_number(tj, "solver_tol", cfg.solver_tol);
        if (!(cfg.solver_tol > 0)) throw ConfigError("solver_tol must be positive");
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    json kp;
    switch (cfg.kernel.tag) {
    case KernelTag::Uniform:
        j["kernel"] = {{"family", "uniform"}, {"params", {{"a", cfg.kernel.a}, {"b", cfg.kernel.b}}}};
        break;
    case KernelTag::Bump:
        j["kernel"] = {{"family", "bump"},
                       {"params", {{"center", cfg.kernel.center}, {"width", cfg.kernel.width}}}};
        break;
    case KernelTag::Gaussian:
        j["kernel"] = {{"family", "gaussian"},
                       {"params", {{"mean", cfg.kernel.mean}, {"sigma", cfg.kernel.sigma}}}};
        break;
    case KernelTag::AlgebraicTail:
        j["kernel"] = {{"family", "algebraic"}, {"params", {{"p", cfg.kernel.p}}}};
        break;
    case KernelTag::Mixture: {
        json comps = json::array();
        for (const auto& c : cfg.kernel.components) {
            json cj;
            cj["weight"] = c.weight;
            if (c.tag == KernelTag::Uniform)
                cj.update({{"family", "uniform"}, {"params", {{"a", c.a}, {"b", c.b}}}});
            else if (c.tag == KernelTag::Bump)
                cj.update({{"family", "bump"},
                           {"params", {{"center", c.center}, {"width", c.width}}}});
            else
                cj.update({{"family", "gaussian"},
                           {"params", {{"mean", c.mean}, {"sigma", c.sigma}}}});
            comps.push_back(cj);
        }
        j["kernel"] = {{"family", "mixture"}, {"params", {{"components", comps}}}};
        break;
    }
    }
    j["kernel"]["h"] = cfg.kernel_h;

    json nl;
    nl["family"] = cfg.nonlinearity_family;
    if (cfg.nonlinearity_family == "logistic") nl["params"] = {{"r", cfg.nl_params[0]}};
    else if (cfg.nonlinearity_family == "cubic")
        nl["params"] = {{"r", cfg.nl_params[0]}, {"a", cfg.nl_params[1]}};
    else if (cfg.nonlinearity_family == "ignition")
        nl["params"] = {{"rho", cfg.nl_params[0]}, {"amp", cfg.nl_params[1]}};
    else if (cfg.nonlinearity_family == "spline") {
        nl["params"] = {{"u", cfg.spline_u}, {"f", cfg.spline_f}};
        if (cfg.spline_slope0) nl["params"]["slope0"] = *cfg.spline_slope0;
        if (cfg.spline_slope1) nl["params"]["slope1"] = *cfg.spline_slope1;
    }
    if (cfg.holder)
        nl["holder"] = {{"A", cfg.holder->A},
                        {"m", cfg.holder->m},
                        {"delta", cfg.holder->delta},
                        {"gamma", cfg.holder->gamma}};
    j["nonlinearity"] = nl;

    json pj;
    if (cfg.profile.c) pj["c"] = *cfg.profile.c;
    pj["find_min_speed"] = cfg.profile.find_min_speed;
    if (!cfg.profile.eps_schedule.empty()) pj["eps_schedule"] = cfg.profile.eps_schedule;
    pj["theta"] = cfg.profile.theta;
    pj["grid"] = {{"h", cfg.profile.grid_h}, {"r", cfg.profile.grid_r}, {"R", cfg.profile.grid_R}};
    j["profile"] = pj;

    j["evolve"] = {{"T", cfg.evolve.T},
                   {"dt", cfg.evolve.dt},
                   {"h", cfg.evolve.h},
                   {"window", {cfg.evolve.window_left, cfg.evolve.window_right}},
                   {"save_every", cfg.evolve.save_every},
                   {"track_level", cfg.evolve.track_level},
                   {"track_every", cfg.evolve.track_every}};
    j["demo_nonunique"] = {{"h", cfg.demo.h},
                           {"grid", {{"r", cfg.demo.grid_r}, {"R", cfg.demo.grid_R}}},
                           {"levels", cfg.demo.levels},
                           {"pin_sweep", cfg.demo.pin_sweep}};
    j["check_limit"] = {{"eps", cfg.check_limit.eps},
                        {"test_function", cfg.check_limit.test_function}};
    j["check_supersolution"] = {{"lambda", cfg.check_supersolution.lambda},
                                {"delta", cfg.check_supersolution.delta},
                                {"N", cfg.check_supersolution.N}};
    j["out_dir"] = cfg.out_dir;
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    j["tolerances"] = {{"solver_tol", cfg.solver_tol}};
    return j.dump(2);
}

} // namespace frontlab
