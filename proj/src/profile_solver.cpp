#include "frontlab/profile_solver.hpp"
#include "frontlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace frontlab {

int Grid::nodes() const {
    double span = (R + r) / h;
    int n = static_cast<int>(std::lround(span));
    if (std::abs(span - n) > 1e-9)
        throw ConfigError("grid: R + r must be an exact multiple of h");
    return n + 1;
}

void Grid::validate(const SampledKernel& kernel) const {
    if (!(h > 0) || !(R + r > 0)) throw ConfigError("grid: need h > 0 and R + r > 0");
    (void)nodes();
    if (std::abs(kernel.h() - h) > 1e-12)
        throw ConfigError("grid spacing must match the kernel sampling");
    auto sup = kernel.declared_support();
    double width = 2.0 * kernel.sample_radius();
    if (std::isfinite(sup.first) && std::isfinite(sup.second))
        width = std::min(width, sup.second - sup.first + 2 * kernel.h());
    if (width > (R + r) / 4.0 + 1e-12)
        throw ConfigError("kernel support width exceeds a quarter of the domain");
}

double Profile::value_at(double xq) const {
    const int n = static_cast<int>(u.size()) - 1;
    double t = (xq - x_offset + grid.r) / grid.h;
    if (t <= 0) return u.front();
    if (t >= n) return u.back();
    int i = static_cast<int>(t);
    double fr = t - i;
    return (1 - fr) * u[static_cast<std::size_t>(i)] + fr * u[static_cast<std::size_t>(i + 1)];
}

double Profile::level_crossing(double level) const {
    const int n = static_cast<int>(u.size());
    for (int i = 0; i + 1 < n; ++i) {
        double a = u[static_cast<std::size_t>(i)], b = u[static_cast<std::size_t>(i + 1)];
        if ((a - level) * (b - level) <= 0 && a != b && a <= level) {
            double fr = (level - a) / (b - a);
            return x(i) + fr * grid.h;
        }
    }
    throw NumericalError("profile has no crossing of the requested level");
}

bool Profile::monotone(double tol) const {
    for (std::size_t i = 0; i + 1 < u.size(); ++i)
        if (u[i + 1] < u[i] - tol) return false;
    return true;
}

void Profile::dump_csv(const std::string& path) const {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw NumericalError("cannot open " + path + " for writing");
    std::fprintf(fp, "x,u\n");
    for (std::size_t i = 0; i < u.size(); ++i)
        std::fprintf(fp, "%.17g,%.17g\n", x(static_cast<int>(i)), u[i]);
    std::fclose(fp);
}

BoundaryCorrections boundary_corrections(const SampledKernel& kernel, const Grid& grid,
                                         double theta) {
    grid.validate(kernel);
    const int n = grid.nodes() - 1;
    BoundaryCorrections bc;
    bc.hr.assign(static_cast<std::size_t>(n + 1), 0.0);
    bc.hR.assign(static_cast<std::size_t>(n + 1), 0.0);
    for (int i = 0; i <= n; ++i) {
        // mass of J beyond the left end seen from node i: integral over s >= i*h
        bc.hr[static_cast<std::size_t>(i)] = theta * kernel.upper_tail_from(i);
        // mass beyond the right end: integral over s <= (i - n) h
        bc.hR[static_cast<std::size_t>(i)] = kernel.prefix_mass(i - n);
    }
    return bc;
}

namespace {

struct SweepContext {
    const SampledKernel* kernel;
    const Nonlinearity* f;
    Grid grid;
    double c, eps, theta, K;
    bool centered;
    std::vector<double> hr, hR;
    std::vector<double> kv; // kernel samples, kv[m + d]
    int m;

    // tridiagonal operator eps D2 - c D1_upwind - (1 + K)
    double lower, diag, upper;

    void init() {
        const double h = grid.h;
        m = kernel->radius_index();
        kv.resize(static_cast<std::size_t>(2 * m + 1));
        for (int d = -m; d <= m; ++d)
            kv[static_cast<std::size_t>(d + m)] = kernel->value_at_offset(d);
        double adv_lo = c > 0 ? c / h : 0.0;
        double adv_hi = c < 0 ? -c / h : 0.0;
        lower = eps / (h * h) + adv_lo;
        upper = eps / (h * h) + adv_hi;
        diag = -2 * eps / (h * h) - std::abs(c) / h - (1.0 + K);
    }

    void convolve(const std::vector<double>& u, std::vector<double>& out) const {
        const int n = static_cast<int>(u.size()) - 1;
        const double h = grid.h;
        // trapezoid end weights folded into a scaled copy
        static thread_local std::vector<double> ut;
        ut.assign(u.begin(), u.end());
        ut.front() *= 0.5;
        ut.back() *= 0.5;
        for (int i = 0; i <= n; ++i) {
            int jlo = std::max(0, i - m), jhi = std::min(n, i + m);
            double s = 0;
            const double* kp = kv.data() + (m + i);
            for (int j = jlo; j <= jhi; ++j) s += kp[-j] * ut[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i)] = s * h;
        }
    }

    // one sweep: solve the linear two-point problem for u_new given u_old
    void sweep(const std::vector<double>& u, std::vector<double>& unew,
               std::vector<double>& conv, std::vector<double>& scratch) const {
        const int n = static_cast<int>(u.size()) - 1;
        const double h = grid.h;
        convolve(u, conv);
        const double cc = centered ? std::abs(c) / (2 * h) : 0.0;
        // rhs on interior nodes
        for (int i = 1; i < n; ++i) {
            std::size_t si = static_cast<std::size_t>(i);
            double rhs = -(conv[si] + (*f)(u[si]) + K * u[si] + hr[si] + hR[si]);
            if (cc != 0.0) rhs += cc * (u[si + 1] - 2 * u[si] + u[si - 1]);
            scratch[si] = rhs;
        }
        scratch[1] -= lower * theta;
        scratch[static_cast<std::size_t>(n - 1)] -= upper * 1.0;

        // Thomas algorithm on the constant-coefficient tridiagonal system
        static thread_local std::vector<double> cp, dp;
        cp.assign(static_cast<std::size_t>(n), 0.0);
        dp.assign(static_cast<std::size_t>(n), 0.0);
        cp[1] = upper / diag;
        dp[1] = scratch[1] / diag;
        for (int i = 2; i < n; ++i) {
            std::size_t si = static_cast<std::size_t>(i);
            double den = diag - lower * cp[si - 1];
            cp[si] = upper / den;
            dp[si] = (scratch[si] - lower * dp[si - 1]) / den;
        }
        unew[static_cast<std::size_t>(n)] = 1.0;
        unew[0] = theta;
        double prev = dp[static_cast<std::size_t>(n - 1)];
        unew[static_cast<std::size_t>(n - 1)] = prev;
        for (int i = n - 2; i >= 1; --i) {
            std::size_t si = static_cast<std::size_t>(i);
            prev = dp[si] - cp[si] * prev;
            unew[si] = prev;
        }
    }
};

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
    return s;
}

} // namespace

SolveResult solve_truncated(const SampledKernel& kernel, const Nonlinearity& f,
                            const Grid& grid, double c, double eps, double theta,
                            const SolveConfig& config) {
    grid.validate(kernel);
    if (eps < 0) throw ConfigError("viscosity must be nonnegative");
    if (!(theta >= 0 && theta < 0.5)) throw ConfigError("theta must lie in [0, 1/2)");
    if (eps == 0 && c == 0) {
        double worst = 0;
        for (int i = 0; i <= 2000; ++i)
            worst = std::min(worst, 1.0 - f.fp(i / 2000.0));
        if (worst < 0)
            throw NumericalError(
                "eps = 0, c = 0 with non-monotone u - f(u): stationary fronts can be "
                "discontinuous; use the non-uniqueness demo instead");
    }

    SweepContext ctx;
    ctx.kernel = &kernel;
    ctx.f = &f;
    ctx.grid = grid;
    ctx.c = c;
    ctx.eps = eps;
    ctx.theta = theta;
    ctx.K = config.lipschitz_safety * f.lipschitz();
    ctx.centered = false;
    auto bc = boundary_corrections(kernel, grid, theta);
    ctx.hr = std::move(bc.hr);
    ctx.hR = std::move(bc.hR);
    ctx.init();

    const int nn = grid.nodes();
    std::vector<double> u, unew(static_cast<std::size_t>(nn)),
        conv(static_cast<std::size_t>(nn)), scratch(static_cast<std::size_t>(nn));
    bool constant_start = !config.warm_start.has_value();
    if (config.warm_start) {
        if (static_cast<int>(config.warm_start->size()) != nn)
            throw ConfigError("warm start size does not match the grid");
        u = *config.warm_start;
        u.front() = theta;
        u.back() = 1.0;
    } else {
        u.assign(static_cast<std::size_t>(nn), config.ascending ? theta : 1.0);
        u.back() = 1.0;
        u.front() = theta;
    }

    IterationReport report;
    report.ordering_checked = constant_start;
    report.monotone_iterates = constant_start;

    int it = 0;
    // phase 1: pure upwind monotone sweeps
    for (; it < config.max_iterations; ++it) {
        ctx.sweep(u, unew, conv, scratch);
        double change = sup_diff(u, unew);
        report.change_history.push_back(change);
        if (constant_start) {
            for (std::size_t i = 0; i < u.size(); ++i) {
                double d = config.ascending ? unew[i] - u[i] : u[i] - unew[i];
                if (d < -1e-12) {
                    report.monotone_iterates = false;
                    throw InvariantError(
                        "monotone scheme violation: iterate ordering failed (K too small?)");
                }
                if (unew[i] < std::min(theta, 1.0) - 1e-12 || unew[i] > 1.0 + 1e-12)
                    throw InvariantError("iterate left the invariant range [theta, 1]");
            }
        }
        std::swap(u, unew);
        if (change <= config.tol) break;
    }
    if (it >= config.max_iterations)
        throw NumericalError("iteration budget exhausted in the monotone phase");
    const std::size_t monotone_len = report.change_history.size();

    // phase 2: deferred-correction polish to the centered-difference fixed
    // point. Boundary-parked profiles can oscillate under the centered stencil;
    // those fall back to the monotone upwind solution.
    if (config.centered_correction && c != 0.0) {
        report.centered_polish_applied = true;
        std::vector<double> upwind_u = u;
        ctx.centered = true;
        int polish = 0;
        bool converged = false;
        for (; polish < config.max_iterations; ++polish) {
            ctx.sweep(u, unew, conv, scratch);
            double change = sup_diff(u, unew);
            report.change_history.push_back(change);
            std::swap(u, unew);
            ++it;
            if (change <= config.tol) { converged = true; break; }
        }
        bool mono = true;
        for (std::size_t i = 0; i + 1 < u.size(); ++i)
            if (u[i + 1] < u[i] - 1e-12) mono = false;
        if (!converged || !mono) {
            report.centered_polish_rejected = true;
            u = std::move(upwind_u);
        }
    }

    report.iterations = it + 1;
    report.final_change = report.change_history.empty() ? 0.0 : report.change_history.back();
    std::size_t transient_end = 0;
    for (std::size_t k = 1; k < std::min<std::size_t>(40, monotone_len); ++k)
        if (report.change_history[k] > report.change_history[k - 1]) transient_end = k;
    for (std::size_t k = std::max<std::size_t>(transient_end, 5); k + 1 < monotone_len; ++k)
        if (report.change_history[k + 1] > report.change_history[k] * (1 + 1e-9) + 1e-300)
            report.change_decays_after_transient = false;

    Profile p;
    p.grid = grid;
    p.u = std::move(u);
    p.c = c;
    p.eps = eps;
    p.theta = theta;
    if (!p.monotone(1e-12))
        throw InvariantError("converged profile is not monotone within 1e-12");
    return {std::move(p), std::move(report)};
}

ContinuationResult viscosity_continuation(const SampledKernel& kernel, const Nonlinearity& f,
                                          const Grid& grid, double c, double theta,
                                          std::vector<double> eps_schedule,
                                          const SolveConfig& config) {
    if (eps_schedule.empty()) {
        for (int k = 0; k < 12; ++k) eps_schedule.push_back(0.1 * std::pow(2.0, -k));
        if (c != 0.0) eps_schedule.push_back(0.0);
    }
    for (std::size_t i = 0; i + 1 < eps_schedule.size(); ++i)
        if (!(eps_schedule[i + 1] < eps_schedule[i]))
            throw ConfigError("eps schedule must be strictly decreasing");
    if (eps_schedule.back() == 0.0 && c == 0.0)
        throw ConfigError("eps = 0 with c = 0 is not part of the continuation");

    ContinuationResult out;
    SolveConfig step_cfg = config;
    Profile prev;
    for (std::size_t k = 0; k < eps_schedule.size(); ++k) {
        double eps = eps_schedule[k];
        auto sol = solve_truncated(kernel, f, grid, c, eps, theta, step_cfg);
        out.eps_used.push_back(eps);
        out.final_report = sol.report;
        if (k > 0) {
            double d = align_and_compare(prev, sol.profile).sup_distance;
            out.aligned_steps.push_back(d);
            if (d > 0.1)
                throw NumericalError("viscosity continuation diverged between eps steps");
        }
        prev = sol.profile;
        step_cfg.warm_start = prev.u;
    }
    out.reached_zero = eps_schedule.back() == 0.0;
    out.profile = std::move(prev);
    out.profile.x_offset = -out.profile.level_crossing(0.5);
    return out;
}

ExtensionResult extend_domain(const SampledKernel& kernel, const Nonlinearity& f,
                              const Grid& base, double c, double theta, int max_doublings,
                              const SolveConfig& config, std::vector<double> eps_schedule) {
    ExtensionResult out;
    try {
        auto cont =
            viscosity_continuation(kernel, f, base, c, theta, std::move(eps_schedule), config);
        Profile cur = cont.profile;
        out.continuation_steps = cont.aligned_steps;
        out.final_report = cont.final_report;
        double final_eps = cont.reached_zero ? 0.0 : cont.eps_used.back();
        Grid g = base;
        for (int round = 0; round < max_doublings; ++round) {
            Grid g2{g.h, 2 * g.r, 2 * g.R};
            SolveConfig cfg = config;
            std::vector<double> warm(static_cast<std::size_t>(g2.nodes()));
            for (int i = 0; i < g2.nodes(); ++i)
                warm[static_cast<std::size_t>(i)] = cur.value_at(g2.x(i));
            cfg.warm_start = std::move(warm);
            auto sol = solve_truncated(kernel, f, g2, c, final_eps, theta, cfg);
            out.final_report = sol.report;
            double d = align_and_compare(cur, sol.profile).sup_distance;
            out.aligned_history.push_back(d);
            cur = sol.profile;
            cur.x_offset = -cur.level_crossing(0.5);
            g = g2;
            if (d <= 1e-6) {
                out.converged = true;
                break;
            }
        }
        out.profile = std::move(cur);
        if (!out.converged) {
            out.diagnosis = "domain extension failed to stabilize (speed below minimal?)";
        } else {
            // a genuine front carries an exponential left tail obeying the
            // linear dispersion relation; below the minimal speed no real
            // decay rate exists and the transition glues to the boundary
            const Profile& pr = out.profile;
            double floor_u = std::max(1e-13, 10.0 * theta);
            double left_safe = pr.x(0) + 2.0 * kernel.sample_radius();
            std::vector<double> xs, ys;
            for (std::size_t i = 0; i < pr.u.size(); ++i) {
                double xv = pr.x(static_cast<int>(i)), uv = pr.u[i];
                if (xv < left_safe || uv <= floor_u || uv >= 1e-3) continue;
                xs.push_back(xv);
                ys.push_back(std::log(uv));
            }
            if (xs.size() < 20) {
                out.converged = false;
                out.diagnosis =
                    "no resolved exponential tail: transition glued to the boundary "
                    "(speed below the minimal speed)";
            } else {
                double nn2 = static_cast<double>(xs.size());
                double sx = 0, sy = 0, sxx = 0, sxy = 0;
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    sx += xs[i]; sy += ys[i]; sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i];
                }
                double lam_hat = (nn2 * sxy - sx * sy) / (nn2 * sxx - sx * sx);
                double phi = -c * lam_hat + kernel.mgf(lam_hat) + (f.fprime0 - 1.0);
                if (!(lam_hat > 0) || std::abs(phi) > 0.02 * std::max(1.0, std::abs(c) * lam_hat)) {
                    out.converged = false;
                    out.diagnosis =
                        "left tail violates the linear dispersion relation "
                        "(speed below the minimal speed)";
                }
            }
        }
    } catch (const NumericalError& e) {
        out.converged = false;
        out.diagnosis = std::string("extension aborted: ") + e.what();
    } catch (const InvariantError& e) {
        out.converged = false;
        out.diagnosis = std::string("extension aborted: ") + e.what();
    }
    return out;
}

double residual(const Profile& p, const SampledKernel& kernel, const Nonlinearity& f) {
    const int n = static_cast<int>(p.u.size()) - 1;
    const double h = p.grid.h;
    if (std::abs(kernel.h() - h) > 1e-12)
        throw ConfigError("residual: kernel sampling must match the profile grid");
    const int m = kernel.radius_index();
    if (2 * m >= n) throw ConfigError("residual: grid too narrow for the kernel support");
    std::vector<double> ut(p.u);
    // interior nodes see the whole kernel support; beyond the grid the field
    // continues with the constant states 0 (left) and 1 (right)
    double worst = 0;
    for (int i = m; i <= n - m; ++i) {
        int jlo = i - m, jhi = i + m;
        double conv = 0;
        for (int j = jlo; j <= jhi; ++j)
            conv += kernel.value_at_offset(i - j) * ut[static_cast<std::size_t>(j)];
        conv *= h;
        // trapezoid end-weights for the covered window fall on interior nodes,
        // so the plain sum already integrates J against u across the support
        conv -= 0.5 * h * (kernel.value_at_offset(-m) * ut[static_cast<std::size_t>(jhi)] +
                           kernel.value_at_offset(m) * ut[static_cast<std::size_t>(jlo)]);
        std::size_t si = static_cast<std::size_t>(i);
        double der = (p.u[si + 1] - p.u[si - 1]) / (2 * h);
        double defect = conv - p.u[si] - p.c * der + f(p.u[si]);
        worst = std::max(worst, std::abs(defect));
    }
    return worst;
}

ShootingResult front_speed_by_shooting(const SampledKernel& kernel, const Nonlinearity& f,
                                       const Grid& grid, double eps, double pin_level,
                                       double bracket, const SolveConfig& config) {
    grid.validate(kernel);
    const int i0 = static_cast<int>(std::lround(grid.r / grid.h));
    if (std::abs(grid.x(i0)) > 1e-9)
        throw ConfigError("shooting needs x = 0 on the grid");
    const std::size_t si0 = static_cast<std::size_t>(i0);

    ShootingResult out;

    // sign of Phi decided without full convergence: ascending iterates bound
    // u_c(0) from below, so crossing the pin decides Phi > 0; a converged
    // ascent below the pin decides Phi < 0.
    auto phi_sign = [&](double c, int budget) -> int {
        SolveConfig cfg = config;
        cfg.centered_correction = false;
        cfg.max_iterations = budget;
        cfg.ascending = true;
        try {
            auto sol = solve_truncated(kernel, f, grid, c, eps, 0.0, cfg);
            ++out.solves;
            return sol.profile.u[si0] > pin_level ? 1 : -1;
        } catch (const NumericalError&) {
            ++out.solves;
            return 0; // undecided within the budget (speed close to the root)
        }
    };

    // The a-priori bracket degrades like nu/rho for small thresholds; the
    // capped exponential e^(lambda x) is a supersolution at
    // kappa_L = min (M(lambda) + L - 1)/lambda with L = sup f(u)/u, so the
    // speed also obeys |c| <= kappa_L in each orientation. Intersecting keeps
    // the search away from under-resolved large-speed regimes.
    double L = std::max(f.fprime0, 0.0);
    for (int i = 1; i <= 2000; ++i) {
        double uu = static_cast<double>(i) / 2000.0;
        L = std::max(L, f(uu) / uu);
    }
    auto exp_super_cap = [&](int orient) { // +1: leftward, -1: rightward
        double best = 1e300;
        for (int i = 0; i <= 200; ++i) {
            double lam = std::exp(std::log(1e-2) + (std::log(40.0) - std::log(1e-2)) * i / 200.0);
            try {
                if (!kernel.mgf_edge_ok(orient * lam)) continue;
                best = std::min(best, (kernel.mgf(orient * lam) + L - 1.0) / lam);
            } catch (const NumericalError&) {
                break;
            }
        }
        return best;
    };
    const double lo = std::max(-bracket, -(exp_super_cap(-1) + 0.05));
    const double hi = std::min(bracket, exp_super_cap(+1) + 0.05);
    if (!(lo < hi)) throw NumericalError("empty speed bracket after supersolution caps");
    int sign_lo = phi_sign(lo, 30000);
    int sign_hi = phi_sign(hi, 30000);
    if (!(sign_lo > 0 && sign_hi < 0))
        throw NumericalError(
            "shooting functional has no sign change on the bracket (grid too coarse or "
            "invalid front data)");

    // At fixed c the iterate's front drifts with velocity v(c) proportional to
    // c - c_root; a secant iteration on v(c) = 0 locates the unique speed
    // without fighting the slow phase mode that stalls plain bisection on Phi.
    SweepContext ctx;
    ctx.kernel = &kernel;
    ctx.f = &f;
    ctx.grid = grid;
    ctx.eps = eps;
    ctx.theta = 0.0;
    ctx.K = config.lipschitz_safety * f.lipschitz();
    ctx.centered = config.centered_correction;
    {
        auto bc = boundary_corrections(kernel, grid, 0.0);
        ctx.hr = std::move(bc.hr);
        ctx.hR = std::move(bc.hR);
    }

    const int nn = grid.nodes();
    std::vector<double> u(static_cast<std::size_t>(nn)), unew(u.size()), conv(u.size()),
        scratch(u.size());
    for (int i = 0; i < nn; ++i)
        u[static_cast<std::size_t>(i)] = std::clamp(pin_level + 0.25 * grid.x(i), 0.0, 1.0);
    u.front() = 0.0;
    u.back() = 1.0;

    auto run_sweeps = [&](int count) {
        double change = 0;
        for (int k = 0; k < count; ++k) {
            ctx.sweep(u, unew, conv, scratch);
            change = sup_diff(u, unew);
            std::swap(u, unew);
            ++out.solves;
            if (change <= config.tol) break;
        }
        return change;
    };
    // the drift is read off the mid-front crossing, which settles with the
    // core shape; the pin level may sit in a slowly equilibrating tail
    auto crossing_at = [&](double level) {
        for (int i = 0; i + 1 < nn; ++i) {
            std::size_t si = static_cast<std::size_t>(i);
            if (u[si] <= level && u[si + 1] > level)
                return grid.x(i) + grid.h * (level - u[si]) / (u[si + 1] - u[si]);
        }
        throw NumericalError("shooting iterate lost its level crossing");
    };
    const double track_level = 0.5;
    auto crossing = [&]() { return crossing_at(track_level); };
    auto recenter = [&]() {
        int shift = static_cast<int>(std::lround(crossing() / grid.h));
        if (shift == 0) return;
        std::vector<double> shifted(u.size());
        for (int i = 0; i < nn; ++i) {
            int j = i + shift;
            double v;
            if (j < 0) v = 0.0;
            else if (j >= nn) v = 1.0;
            else v = u[static_cast<std::size_t>(j)];
            shifted[static_cast<std::size_t>(i)] = v;
        }
        shifted.front() = 0.0;
        shifted.back() = 1.0;
        u = std::move(shifted);
    };

    auto reset_ramp = [&]() {
        for (int i = 0; i < nn; ++i)
            u[static_cast<std::size_t>(i)] =
                std::clamp(track_level + 0.25 * grid.x(i), 0.0, 1.0);
        u.front() = 0.0;
        u.back() = 1.0;
    };

    // Hybrid root search on the drift velocity: the sign of the drift halves a
    // dynamic bracket (robust), a secant step on v(c) accelerates inside it.
    double dyn_lo = lo, dyn_hi = hi;
    double c = 0.5 * (lo + hi);
    ctx.c = c;
    ctx.init();
    double c_prev = 0, v_prev = 0;
    bool have_prev = false;
    double khat = 0;
    bool done = false;
    double big_move = 1.0;
    const double park_left = -0.6 * grid.r, park_right = 0.6 * grid.R;
    for (int step = 0; step < 160; ++step) {
        run_sweeps(big_move > 1e-3 * bracket ? 900 : 400);
        double xc = crossing();
        bool parked_right = xc > park_right, parked_left = xc < park_left;
        bool too_steep = false;
        if (!parked_right && !parked_left) {
            // interior yet sub-grid steep: a lattice-pinned state from an
            // excessive |c|; only the magnitude is informative
            double max_jump = 0;
            for (std::size_t i = 0; i + 1 < u.size(); ++i)
                max_jump = std::max(max_jump, std::abs(u[i + 1] - u[i]));
            too_steep = max_jump > 0.2;
        }
        if (parked_right || parked_left || too_steep) {
            if (parked_right) dyn_hi = c;
            else if (parked_left) dyn_lo = c;
            else if (c > 0) dyn_hi = c;
            else dyn_lo = c;
            c = 0.5 * (dyn_lo + dyn_hi);
            ctx.c = c;
            ctx.init();
            reset_ramp();
            have_prev = false;
            big_move = 1.0;
            continue;
        }
        recenter();
        int meas = std::min(3200, 400 * (1 + step / 6));
        double x0 = crossing();
        run_sweeps(meas);
        double v = (crossing() - x0) / meas; // drift per sweep
        if (std::getenv("FRONTLAB_SHOOT_TRACE"))
            std::fprintf(stderr, "[shoot] step=%d c=%.8f xc=%.4f v=%.3e khat=%.3e dyn=[%.4f,%.4f]\n",
                         step, c, x0, v, khat, dyn_lo, dyn_hi);
        if (v > 0) dyn_hi = std::min(dyn_hi, c);
        else if (v < 0) dyn_lo = std::max(dyn_lo, c);
        if (have_prev && std::abs(c - c_prev) > 1e-14) {
            double k_new = (v - v_prev) / (c - c_prev);
            if (k_new > 0) khat = k_new; // keep the last credible response slope
        }
        double v_stop = khat > 0 ? std::max(1e-14, khat * 1e-7) : 1e-14;
        if ((std::abs(v) <= v_stop && step > 2) ||
            dyn_hi - dyn_lo <= std::max(1e-10, 1e-9 * std::abs(c))) {
            done = true;
            break;
        }
        double c_next;
        if (khat > 0) {
            c_next = c - v / khat;
            double cap = 0.5 * (dyn_hi - dyn_lo);
            c_next = std::clamp(c_next, c - cap, c + cap);
        } else {
            c_next = c - (v > 0 ? 1.0 : -1.0) * 0.25 * (dyn_hi - dyn_lo);
        }
        if (!(c_next > dyn_lo && c_next < dyn_hi)) c_next = 0.5 * (dyn_lo + dyn_hi);
        c_prev = c;
        v_prev = v;
        have_prev = true;
        if (c_next == c) c_next = 0.5 * (dyn_lo + dyn_hi);
        big_move = std::abs(c_next - c);
        c = c_next;
        ctx.c = c;
        ctx.init();
        recenter();
    }
    if (!done)
        throw NumericalError("drift-secant shooting did not settle within the step budget");
    if (c <= lo + 1e-12 || c >= hi - 1e-12)
        throw NumericalError("shooting speed saturated the a-priori bracket");
    run_sweeps(2000);
    recenter();

    out.c = c;
    out.profile.grid = grid;
    out.profile.u = std::move(u);
    out.profile.c = c;
    out.profile.eps = eps;
    out.profile.theta = 0.0;
    // normalization: translate so the interpolated pin level sits at x = 0
    out.profile.x_offset = -out.profile.level_crossing(pin_level);
    out.phi = out.profile.value_at(0.0) - pin_level;

    // post-hoc check: the decided signs of Phi cross zero exactly once on the
    // bracket at this coarse resolution (undecided points sit next to the root)
    int changes = 0;
    int prev = 0;
    for (int k = 0; k <= 6; ++k) {
        double ck = lo + (hi - lo) * k / 6.0;
        int s = (k == 0) ? sign_lo : (k == 6 ? sign_hi : phi_sign(ck, 2500));
        if (s == 0) s = ck < c ? 1 : -1;
        if (prev != 0 && s != prev) ++changes;
        prev = s;
    }
    out.sign_changes = changes;
    return out;
}

ShootingResult ignition_speed(const SampledKernel& kernel, const Nonlinearity& f_ignition,
                              const Grid& grid, double eps, const SolveConfig& config) {
    auto cls = classify(f_ignition);
    if (!cls.ignition)
        throw ConfigError("ignition_speed requires an ignition-classified nonlinearity");
    double bracket = speed_bracket(kernel, f_ignition);
    auto res = front_speed_by_shooting(kernel, f_ignition, grid, eps, cls.rho, bracket, config);
    if (std::abs(res.c) > bracket + 1e-9)
        throw InvariantError("ignition speed escaped the a-priori bracket");
    return res;
}

MinimalSpeedResult minimal_speed_monostable(const SampledKernel& kernel,
                                            const Nonlinearity& f, const Grid& grid,
                                            double eps, std::vector<double> theta_schedule,
                                            const SolveConfig& config) {
    auto cls = classify(f);
    if (!cls.monostable)
        throw ConfigError("minimal_speed_monostable requires a monostable nonlinearity");
    if (theta_schedule.empty())
        for (int k = 0; k < 8; ++k) theta_schedule.push_back(0.2 * std::pow(2.0, -k));
    for (std::size_t i = 0; i + 1 < theta_schedule.size(); ++i)
        if (!(theta_schedule[i + 1] < theta_schedule[i]))
            throw ConfigError("theta schedule must be strictly decreasing");

    MinimalSpeedResult out;
    for (double theta : theta_schedule) {
        auto f_theta = ignition_approx(f, theta);
        double bracket = speed_bracket(kernel, f_theta);
        auto res = front_speed_by_shooting(kernel, f_theta, grid, eps, theta, bracket, config);
        out.thetas.push_back(theta);
        out.c_thetas.push_back(res.c);
    }
    for (std::size_t i = 0; i + 1 < out.c_thetas.size(); ++i)
        if (out.c_thetas[i + 1] < out.c_thetas[i] - 1e-8)
            throw InvariantError("cutoff speeds failed to increase as theta decreases");

    // Cutoff-law extrapolation: the speed deficit closes like 1/log(theta)^2
    // with a 1/log(theta)^3 correction. Solving the three-point linear system
    // c_k = c* - A/L_k^2 - C/L_k^3, L_k = |log theta_k|, gives the limit.
    const std::size_t K = out.c_thetas.size();
    if (K >= 3) {
        double L1 = -std::log(out.thetas[K - 3]), c1v = out.c_thetas[K - 3];
        double L2 = -std::log(out.thetas[K - 2]), c2v = out.c_thetas[K - 2];
        double L3 = -std::log(out.thetas[K - 1]), c3v = out.c_thetas[K - 1];
        double m[3][4] = {{1, -1 / (L1 * L1), -1 / (L1 * L1 * L1), c1v},
                          {1, -1 / (L2 * L2), -1 / (L2 * L2 * L2), c2v},
                          {1, -1 / (L3 * L3), -1 / (L3 * L3 * L3), c3v}};
        for (int col = 0; col < 3; ++col) {
            int piv = col;
            for (int row = col + 1; row < 3; ++row)
                if (std::abs(m[row][col]) > std::abs(m[piv][col])) piv = row;
            std::swap(m[piv], m[col]);
            for (int row = 0; row < 3; ++row) {
                if (row == col) continue;
                double fct = m[row][col] / m[col][col];
                for (int cc2 = col; cc2 < 4; ++cc2) m[row][cc2] -= fct * m[col][cc2];
            }
        }
        out.c_star = m[0][3] / m[0][0];
    } else {
        out.c_star = out.c_thetas.back();
    }
    return out;
}

TailFit tail_fit(const Profile& p, const SampledKernel& kernel, const Nonlinearity& f,
                 double c) {
    TailFit out;
    out.smoothness_warning = !kernel.c1_smooth();

    const double left_safe = p.x(0) + 2.0 * kernel.sample_radius();
    std::vector<double> xs, ys_plain, ys_corr;
    for (std::size_t i = 0; i < p.u.size(); ++i) {
        double xv = p.x(static_cast<int>(i));
        double uv = p.u[i];
        if (xv < left_safe || xv > -1e-6) continue;
        if (uv <= 1e-13 || uv >= 1e-3) continue;
        xs.push_back(xv);
        ys_plain.push_back(std::log(uv));
        ys_corr.push_back(std::log(uv / std::abs(xv)));
    }
    if (xs.size() < 30)
        throw NumericalError("tail window too short or contaminated by boundary correction");

    auto regress = [](const std::vector<double>& x, const std::vector<double>& y,
                      double& slope, double& rms, double& r2) {
        double n = static_cast<double>(x.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
        }
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        double icept = (sy - slope * sx) / n;
        double ssr = 0, sst = 0, my = sy / n;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double e = y[i] - (slope * x[i] + icept);
            ssr += e * e;
            sst += (y[i] - my) * (y[i] - my);
        }
        rms = std::sqrt(ssr / n);
        r2 = sst > 0 ? 1.0 - ssr / sst : 1.0;
    };

    double r2p = 0, r2c = 0;
    regress(xs, ys_plain, out.lambda_plain, out.residual_plain, r2p);
    regress(xs, ys_corr, out.lambda_corrected, out.residual_corrected, r2c);

    auto base = c1(kernel, f);
    out.log_corrected = std::abs(c - base.speed) <= 1e-6;
    out.lambda_hat = out.log_corrected ? out.lambda_corrected : out.lambda_plain;
    out.fit_r2 = out.log_corrected ? r2c : r2p;
    out.lambda_of_c_value = lambda_of_c(kernel, f, std::max(c, base.speed)).lambda;
    return out;
}

AlignResult align_and_compare(const Profile& p1, const Profile& p2) {
    double c1x = p1.level_crossing(0.5);
    double c2x = p2.level_crossing(0.5);
    AlignResult out;
    out.shift = c1x - c2x;
    double lo = std::max(p1.x_min(), p2.x_min() + out.shift);
    double hi = std::min(p1.x_max(), p2.x_max() + out.shift);
    if (!(hi > lo)) throw NumericalError("aligned profiles do not overlap");
    double worst = 0;
    for (std::size_t i = 0; i < p1.u.size(); ++i) {
        double xv = p1.x(static_cast<int>(i));
        if (xv < lo || xv > hi) continue;
        worst = std::max(worst, std::abs(p1.u[i] - p2.value_at(xv - out.shift)));
    }
    out.sup_distance = worst;
    return out;
}

} // namespace frontlab
