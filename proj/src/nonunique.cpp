#include "frontlab/nonunique.hpp"

#include <array>
#include "frontlab/dispersion.hpp"
#include "frontlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace frontlab {

namespace {

// quintic with value/slope prescribed at both ends and zero end curvature,
// in the scaled variable t in [0,1]
std::array<double, 6> blend5(double v0, double d0, double v1, double d1) {
    std::array<double, 6> c{};
    double A = v1 - v0 - d0, B = d1 - d0;
    c[0] = v0;
    c[1] = d0;
    c[2] = 0;
    c[3] = 10 * A - 4 * B;
    c[4] = -15 * A + 7 * B;
    c[5] = 6 * A - 3 * B;
    return c;
}

double poly_eval(const std::array<double, 6>& c, double t) {
    double r = 0;
    for (int i = 5; i >= 0; --i) r = r * t + c[static_cast<std::size_t>(i)];
    return r;
}

double poly_deriv(const std::array<double, 6>& c, double t) {
    double r = 0;
    for (int i = 5; i >= 1; --i) r = r * t + i * c[static_cast<std::size_t>(i)];
    return r;
}

} // namespace

NonuniqueCase build_nonunique_case(double h) {
    NonuniqueCase out;
    // KPP spline: exactly linear f = f'(0) u near 0, a dip, then a stretch
    // steeper than 1 so that g = u - f(u) loses monotonicity
    out.f = make_spline({0.0, 0.1, 0.3, 0.5, 0.65, 0.8, 1.0},
                        {0.0, 0.02, 0.05, 0.06, 0.28, 0.21, 0.0}, 0.45);
    auto cls = classify(out.f);
    if (!cls.monostable || !cls.kpp)
        throw InvariantError("shipped nonuniqueness reaction failed the classifier");
    if (!(out.f.fprime0 > 0 && out.f.fprime0 < 1))
        throw InvariantError("shipped nonuniqueness reaction needs 0 < f'(0) < 1");
    out.g_info = g_analysis(out.f);
    if (!out.g_info.has_plateau)
        throw InvariantError("shipped nonuniqueness reaction has monotone g");
    // re-match the level pair at 70% of the hump height: at the extreme pair
    // the flanks leave with zero slope and the regularization degenerates
    {
        auto g = [&](double u) { return u - out.f(u); };
        double ah = out.g_info.alpha_hat, bh = out.g_info.beta_hat;
        double L = g(bh) + 0.7 * (g(ah) - g(bh));
        auto solve_level = [&](double lo, double hi) {
            double flo = g(lo) - L;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi), fm = g(mid) - L;
                if ((flo < 0) == (fm < 0)) { lo = mid; flo = fm; } else hi = mid;
            }
            return 0.5 * (lo + hi);
        };
        out.g_info.a = solve_level(0.0, ah);
        out.g_info.b = solve_level(bh, 1.0);
        out.g_info.level = L;
    }

    out.family = KernelFamily::mixture({{KernelTag::Bump, 0.15, 0, 0, -0.5, 0.4, 0, 1},
                                        {KernelTag::Bump, 0.85, 0, 0, 2.0, 1.0, 0, 1}});
    auto kernel = build_kernel(out.family, h);
    auto speed = c1(kernel, out.f);
    out.c1_value = speed.speed;
    if (!(out.c1_value <= 0))
        throw InvariantError("shipped nonuniqueness kernel must give c1 <= 0");
    return out;
}

RegularizedG::RegularizedG(const Nonlinearity& f, const GAnalysis& ga, int n) : f_(f) {
    if (n < 2) throw ConfigError("regularization index must be at least 2");
    if (!ga.has_plateau) throw ConfigError("regularization needs a plateau pair");
    n_ = n;
    a_ = ga.a;
    b_ = ga.b;
    level_ = ga.level;
    slope_ = 1.0 / n;

    auto g = [&](double u) { return u - f_(u); };
    auto gp = [&](double u) { return 1.0 - f_.fp(u); };
    const double rise = slope_ * (b_ - a_);

    for (int attempt = 0; attempt < 6; ++attempt) {
        double widen = std::pow(2.0, attempt);
        da_ = std::min(2.0 * rise / std::max(gp(a_), 1e-3) * widen, 0.8 * a_);
        db_ = std::min(2.0 * rise / std::max(gp(b_), 1e-3) * widen, 0.8 * (1.0 - b_));
        // shoulders: C^1 joins from g to the linear stretch through the plateau
        left_coef_ = blend5(g(a_ - da_), gp(a_ - da_) * da_, level_, slope_ * da_);
        right_coef_ = blend5(level_ + rise, slope_ * db_, g(b_ + db_), gp(b_ + db_) * db_);
        bool increasing = true;
        for (int i = 0; i <= 3000 && increasing; ++i)
            if (derivative(static_cast<double>(i) / 3000.0) <= 0) increasing = false;
        if (increasing) break;
        if (attempt == 5)
            throw NumericalError("regularized g could not be made strictly increasing");
    }

    sup_distance_ = 0;
    for (int i = 0; i <= 20000; ++i) {
        double u = static_cast<double>(i) / 20000.0;
        sup_distance_ = std::max(sup_distance_, std::abs((*this)(u) - g_tilde(u)));
    }

    const int tn = 1 << 14;
    table_u_.resize(tn + 1);
    table_g_.resize(tn + 1);
    for (int i = 0; i <= tn; ++i) {
        double u = static_cast<double>(i) / tn;
        table_u_[static_cast<std::size_t>(i)] = u;
        table_g_[static_cast<std::size_t>(i)] = (*this)(u);
    }
}

double RegularizedG::g_tilde(double u) const {
    if (u >= a_ && u <= b_) return level_;
    return u - f_(u);
}

double RegularizedG::operator()(double u) const {
    if (u < a_ - da_ || u > b_ + db_) return u - f_(u);
    if (u < a_) return poly_eval(left_coef_, (u - (a_ - da_)) / da_);
    if (u <= b_) return level_ + slope_ * (u - a_);
    return poly_eval(right_coef_, (u - b_) / db_);
}

double RegularizedG::derivative(double u) const {
    if (u < a_ - da_ || u > b_ + db_) return 1.0 - f_.fp(u);
    if (u < a_) return poly_deriv(left_coef_, (u - (a_ - da_)) / da_) / da_;
    if (u <= b_) return slope_;
    return poly_deriv(right_coef_, (u - b_) / db_) / db_;
}

double RegularizedG::inverse(double target) const {
    target = std::clamp(target, table_g_.front(), table_g_.back());
    std::size_t lo = 0, hi = table_g_.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (table_g_[mid] <= target) lo = mid; else hi = mid;
    }
    double glo = table_g_[lo], ghi = table_g_[hi];
    double u = ghi > glo
                   ? table_u_[lo] + (target - glo) / (ghi - glo) * (table_u_[hi] - table_u_[lo])
                   : table_u_[lo];
    for (int it = 0; it < 4; ++it) {
        double err = (*this)(u)-target;
        double d = derivative(u);
        if (d <= 0) break;
        u = std::clamp(u - err / d, table_u_[lo], table_u_[hi]);
    }
    return u;
}

RegularizedSolve solve_regularized(const SampledKernel& kernel, const RegularizedG& gn,
                                   const Grid& grid, double pin, double tol,
                                   int max_iterations) {
    grid.validate(kernel);
    const int nn = grid.nodes();
    const int n = nn - 1;
    const int m = kernel.radius_index();
    const double h = grid.h;
    if (!(pin > 0 && pin < 1)) throw ConfigError("pin level must lie in (0,1)");

    // The plain 0-tail iterate drifts at the selected front speed (c1 < 0 by
    // construction), so an infinitesimal boundary source anchors the
    // translate; it perturbs the profile only at the e^(-lambda r) scale.
    const double theta = 1e-5;
    std::vector<double> u(static_cast<std::size_t>(nn), theta), conv(u.size()), ut(u.size());
    u.back() = 1.0;

    auto convolve = [&]() {
        ut.assign(u.begin(), u.end());
        ut.front() *= 0.5;
        ut.back() *= 0.5;
        for (int i = 0; i <= n; ++i) {
            int jlo = std::max(0, i - m), jhi = std::min(n, i + m);
            double s = 0;
            for (int j = jlo; j <= jhi; ++j)
                s += kernel.value_at_offset(i - j) * ut[static_cast<std::size_t>(j)];
            conv[static_cast<std::size_t>(i)] = s * h + theta * kernel.upper_tail_from(i) +
                                                kernel.prefix_mass(i - n);
        }
    };

    RegularizedSolve out;
    int it = 0;
    double change = 1;
    for (; it < max_iterations; ++it) {
        convolve();
        change = 0;
        for (int i = 1; i < n; ++i) {
            std::size_t si = static_cast<std::size_t>(i);
            double next = gn.inverse(conv[si]);
            change = std::max(change, std::abs(next - u[si]));
            u[si] = next;
        }
        u.front() = theta;
        u.back() = 1.0;
        if (change <= tol) break;
    }
    if (change > tol)
        throw NumericalError("regularized stationary iteration did not converge");

    out.iterations = it + 1;
    out.final_change = change;
    out.profile.grid = grid;
    out.profile.u = std::move(u);
    out.profile.c = 0;
    out.profile.eps = 0;
    out.profile.x_offset = -out.profile.level_crossing(pin);

    // certified stationary residual on kernel-covered nodes
    const auto& uu = out.profile.u;
    std::vector<double> ut2(uu);
    double worst = 0;
    for (int i = m; i <= n - m; ++i) {
        double s = 0;
        for (int j = i - m; j <= i + m; ++j)
            s += kernel.value_at_offset(i - j) * ut2[static_cast<std::size_t>(j)];
        s *= h;
        s -= 0.5 * h *
             (kernel.value_at_offset(-m) * ut2[static_cast<std::size_t>(i + m)] +
              kernel.value_at_offset(m) * ut2[static_cast<std::size_t>(i - m)]);
        worst = std::max(worst, std::abs(s - gn(uu[static_cast<std::size_t>(i)])));
    }
    out.residual = worst;
    return out;
}

DiscontinuousLimit extract_discontinuous_limit(const std::vector<Profile>& levels,
                                               const SampledKernel& kernel,
                                               const RegularizedG& finest,
                                               const GAnalysis& ga) {
    if (levels.size() < 4)
        throw ConfigError("need at least 4 regularization levels for the limit");
    const Profile& last = levels.back();
    const Profile& prev = levels[levels.size() - 2];
    const double h = last.grid.h;

    DiscontinuousLimit out;

    // 1. nodewise Richardson extrapolation (error ~ C/n with doubling indices)
    out.extrapolant.grid = last.grid;
    out.extrapolant.c = 0;
    out.extrapolant.x_offset = last.x_offset;
    out.extrapolant.u.resize(last.u.size());
    for (int i = 0; i < static_cast<int>(last.u.size()); ++i) {
        double x = last.x(i);
        out.extrapolant.u[static_cast<std::size_t>(i)] =
            std::clamp(2.0 * last.u[static_cast<std::size_t>(i)] - prev.value_at(x), 0.0, 1.0);
    }

    // jump data read off the extrapolant: the pin rides through (0, a) on every
    // level, and the outer right branch continues linearly into the jump point
    auto at = [&](double x) { return out.extrapolant.value_at(x); };
    double standoff = 3 * h;
    try {
        double xa = last.level_crossing(ga.a + 0.1 * (ga.b - ga.a));
        double xb = last.level_crossing(ga.b - 0.1 * (ga.b - ga.a));
        standoff = std::max(3 * h, 5.0 * (xb - xa));
    } catch (const NumericalError&) {
        // lens already sub-cell on the finest level
    }
    out.jump_left = 2.0 * last.value_at(0.0) - prev.value_at(0.0);
    double v1 = at(standoff), v2 = at(2 * standoff);
    out.jump_right = v1 - (v2 - v1);
    out.jump_size = out.jump_right - out.jump_left;
    out.separation_ok = out.jump_size >= 0.5 * (ga.b - ga.a);

    // 2. the limit problem J*u = g~(u) solved directly: the same anchored
    // pointwise iteration with the two-branch (jumping) inverse of g~
    auto g = [&](double u) { return finest.g_tilde(u); };
    auto inv_branch = [&](double target, double lo, double hi) {
        double flo = g(lo) - target;
        for (int it = 0; it < 100; ++it) {
            double mid = 0.5 * (lo + hi), fm = g(mid) - target;
            if ((flo < 0) == (fm < 0)) { lo = mid; flo = fm; } else hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    auto pseudo_inverse = [&](double target) {
        if (target <= 0) return 0.0;
        if (target >= g(1.0)) return 1.0;
        if (target < ga.level) return inv_branch(target, 0.0, ga.a);
        if (target > ga.level) return inv_branch(target, ga.b, 1.0);
        return ga.a;
    };

    const Grid grid = last.grid;
    const int nn = grid.nodes();
    const int n = nn - 1;
    const int m = kernel.radius_index();
    const double theta = 1e-5;
    std::vector<double> u(static_cast<std::size_t>(nn)), conv(u.size()), ut(u.size());
    for (int i = 0; i < nn; ++i)
        u[static_cast<std::size_t>(i)] = std::clamp(last.value_at(grid.x(i)), theta, 1.0);
    int it = 0;
    double change = 1;
    for (; it < 60000; ++it) {
        ut.assign(u.begin(), u.end());
        ut.front() *= 0.5;
        ut.back() *= 0.5;
        for (int i = 0; i <= n; ++i) {
            int jlo = std::max(0, i - m), jhi = std::min(n, i + m);
            double s = 0;
            for (int j = jlo; j <= jhi; ++j)
                s += kernel.value_at_offset(i - j) * ut[static_cast<std::size_t>(j)];
            conv[static_cast<std::size_t>(i)] = s * h + theta * kernel.upper_tail_from(i) +
                                                kernel.prefix_mass(i - n);
        }
        change = 0;
        for (int i = 1; i < n; ++i) {
            std::size_t si = static_cast<std::size_t>(i);
            double next = pseudo_inverse(conv[si]);
            change = std::max(change, std::abs(next - u[si]));
            u[si] = next;
        }
        u.front() = theta;
        u.back() = 1.0;
        if (change <= 1e-10) break;
    }
    if (change > 1e-10)
        throw NumericalError("direct g~ iteration for the limit did not converge");

    out.limit.grid = grid;
    out.limit.c = 0;
    out.limit.u = std::move(u);
    out.limit.x_offset = -out.limit.level_crossing(ga.a);

    // off-jump distance between the extrapolated and the direct limit
    int jump_node =
        static_cast<int>(std::lround((0.0 - out.limit.x_offset + grid.r) / h));
    double dist = 0;
    for (int i = 0; i < nn; ++i) {
        double x = out.limit.x(i);
        if (std::abs(x) <= standoff + 2 * h) continue;
        dist = std::max(dist, std::abs(out.limit.u[static_cast<std::size_t>(i)] -
                                       out.extrapolant.value_at(x)));
    }
    out.refinement_distance = dist;

    // 3. certificates on the limit: stationary residual away from the jump
    // cell, and continuity of J*u across it
    std::vector<double> cv(out.limit.u.size());
    double worst = 0;
    for (int i = m; i <= n - m; ++i) {
        double s = 0;
        for (int j = i - m; j <= i + m; ++j)
            s += kernel.value_at_offset(i - j) * out.limit.u[static_cast<std::size_t>(j)];
        s *= h;
        s -= 0.5 * h *
             (kernel.value_at_offset(-m) * out.limit.u[static_cast<std::size_t>(i + m)] +
              kernel.value_at_offset(m) * out.limit.u[static_cast<std::size_t>(i - m)]);
        cv[static_cast<std::size_t>(i)] = s;
        if (std::abs(i - jump_node) <= 3) continue;
        double gt = finest.g_tilde(out.limit.u[static_cast<std::size_t>(i)]);
        worst = std::max(worst, std::abs(s - gt));
    }
    out.residual_offjump = worst;

    double maxinc = 0;
    for (int i = m; i + 1 <= n - m; ++i)
        maxinc = std::max(maxinc, std::abs(cv[static_cast<std::size_t>(i + 1)] -
                                           cv[static_cast<std::size_t>(i)]));
    out.conv_max_increment = maxinc;
    out.conv_increment_bound = kernel.max_value() * h * 1.1 + 1e-8;
    out.conv_continuous_ok = maxinc <= out.conv_increment_bound;
    return out;
}

} // namespace frontlab
