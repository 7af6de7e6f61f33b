#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "frontlab/dispersion.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/nonunique.hpp"

#include <cmath>

using namespace frontlab;

TEST_CASE("shipped case passes all its certificates") {
    auto cs = build_nonunique_case(0.01);
    auto cls = classify(cs.f);
    CHECK(cls.monostable);
    CHECK(cls.kpp);
    CHECK(cs.f.fprime0 > 0);
    CHECK(cs.f.fprime0 < 1);
    CHECK(cs.c1_value <= 0);
    REQUIRE(cs.g_info.has_plateau);
    auto g = [&](double u) { return u - cs.f(u); };
    CHECK(std::abs(g(cs.g_info.a) - g(cs.g_info.b)) <= 1e-8);
    CHECK(cs.g_info.a < cs.g_info.alpha_hat);
    CHECK(cs.g_info.beta_hat < cs.g_info.b);
}

TEST_CASE("regularized g family") {
    auto cs = build_nonunique_case(0.01);
    RegularizedG g8(cs.f, cs.g_info, 8);
    RegularizedG g16(cs.f, cs.g_info, 16);

    SUBCASE("strictly increasing with the prescribed plateau slope") {
        for (int i = 0; i <= 5000; ++i) {
            double u = i / 5000.0;
            CHECK(g8.derivative(u) > 0);
        }
        double mid = 0.5 * (cs.g_info.a + cs.g_info.b);
        CHECK(g8.derivative(mid) == doctest::Approx(1.0 / 8).epsilon(1e-12));
    }
    SUBCASE("uniform convergence to the plateau truncation") {
        CHECK(g8.sup_distance() <= 1.0 / 8);
        CHECK(g16.sup_distance() <= 1.0 / 16);
        CHECK(g16.sup_distance() < g8.sup_distance());
    }
    SUBCASE("u - g_n passes the KPP classifier") {
        for (const RegularizedG* gn : {&g8, &g16}) {
            Nonlinearity fn;
            fn.f = [gn](double u) { return u - (*gn)(u); };
            fn.fp = [gn](double u) { return 1.0 - gn->derivative(u); };
            fn.fprime0 = 1.0 - gn->derivative(0.0);
            fn.fprime1 = 1.0 - gn->derivative(1.0);
            auto c = classify(fn);
            CHECK(c.monostable);
            CHECK(c.kpp);
        }
    }
    SUBCASE("family ordered toward the truncation") {
        // the C^1 shoulders may dip below g by O(g'' delta^2); the ordering
        // holds up to that construction slack
        for (int i = 0; i <= 2000; ++i) {
            double u = i / 2000.0;
            CHECK(g8(u) >= g16(u) - 5e-4);
            CHECK(g16(u) >= g8.g_tilde(u) - 5e-4);
        }
    }
    SUBCASE("inverse round trip") {
        for (double u : {0.05, 0.3, 0.52, 0.6, 0.75, 0.95})
            CHECK(g8.inverse(g8(u)) == doctest::Approx(u).epsilon(1e-9));
    }
}

TEST_CASE("regularized solves and the discontinuous limit") {
    const double h = 0.01;
    auto cs = build_nonunique_case(h);
    auto k = build_kernel(cs.family, h);
    Grid g{h, 30, 14};

    std::vector<Profile> levels;
    Profile raw_prev;
    for (int n : {8, 16, 32, 64}) {
        RegularizedG gn(cs.f, cs.g_info, n);
        auto sol = solve_regularized(k, gn, g, cs.g_info.a);
        CHECK(sol.residual <= 1e-8);
        CHECK(sol.profile.monotone(1e-10));
        for (double v : sol.profile.u) {
            CHECK(v >= -1e-12);
            CHECK(v <= 1.0 + 1e-12);
        }
        // pinned: interpolated value at x = 0 equals a
        CHECK(std::abs(sol.profile.value_at(0.0) - cs.g_info.a) <= 1e-10);
        // monotone dependence: larger g gives the smaller anchored iterate
        if (!raw_prev.u.empty())
            for (std::size_t i = 0; i < sol.profile.u.size(); ++i)
                CHECK(raw_prev.u[i] <= sol.profile.u[i] + 1e-9);
        raw_prev = sol.profile;
        levels.push_back(sol.profile);
    }

    RegularizedG finest(cs.f, cs.g_info, 64);
    auto lim = extract_discontinuous_limit(levels, k, finest, cs.g_info);

    CHECK(lim.separation_ok);
    CHECK(lim.jump_size >= 0.5 * (cs.g_info.b - cs.g_info.a));
    CHECK(std::abs(lim.jump_left - cs.g_info.a) <= 1e-9);
    CHECK(std::abs(lim.jump_right - cs.g_info.b) <= 0.02 * cs.g_info.b);
    CHECK(lim.residual_offjump <= 1e-4);
    CHECK(lim.conv_continuous_ok);
    CHECK(lim.conv_max_increment <= lim.conv_increment_bound);
    // boundary limits
    CHECK(lim.limit.u.front() <= 1e-3);
    CHECK(1.0 - lim.limit.u.back() <= 1e-3);
    // the extrapolated sequence stays near the direct limit away from the jump
    CHECK(lim.refinement_distance <= 0.1);

    CHECK_THROWS_AS(
        extract_discontinuous_limit({levels[0], levels[1]}, k, finest, cs.g_info),
        ConfigError);
}
