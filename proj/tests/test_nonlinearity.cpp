#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "frontlab/errors.hpp"
#include "frontlab/nonlinearity.hpp"

#include <cmath>

using namespace frontlab;

TEST_CASE("classification of the shipped families") {
    auto lg = make_logistic(1.0);
    auto c = classify(lg);
    CHECK(c.monostable);
    CHECK(c.kpp);
    CHECK_FALSE(c.ignition);
    CHECK(lg.fprime0 == doctest::Approx(1.0));

    // f(u) = u(1-u)(1+5u) exceeds f'(0) u in the interior
    auto cu = classify(make_cubic(1.0, 5.0));
    CHECK(cu.monostable);
    CHECK_FALSE(cu.kpp);
    CHECK(cu.worst_kpp.excess > 0.1);
    CHECK(cu.worst_kpp.u > 0.2);
    CHECK(cu.worst_kpp.u < 0.8);

    auto ig = classify(make_ignition(0.3, 1.0));
    CHECK(ig.ignition);
    CHECK_FALSE(ig.kpp);
    CHECK_FALSE(ig.monostable);
    CHECK(ig.rho == doctest::Approx(0.3).epsilon(0.01));
}

TEST_CASE("classification is stable under grid refinement") {
    for (const auto& f : {make_logistic(1.0), make_logistic(0.5), make_cubic(1.0, 5.0),
                          make_ignition(0.3, 1.0), make_cubic(0.5, 1.0)}) {
        auto c4 = classify(f, 10000);
        auto c5 = classify(f, 100000);
        CHECK(c4.monostable == c5.monostable);
        CHECK(c4.kpp == c5.kpp);
        CHECK(c4.ignition == c5.ignition);
    }
}

TEST_CASE("f(0) or f(1) off zero is a hard error") {
    Nonlinearity bad;
    bad.f = [](double u) { return u * (1 - u) + 1e-6; };
    bad.fp = [](double u) { return 1 - 2 * u; };
    CHECK_THROWS_AS(classify(bad), InvariantError);
}

TEST_CASE("cutoff family") {
    CutoffFamily cut(0.1);
    CHECK(cut.eta(0.05) == 0.0);
    CHECK(cut.eta(0.1) == 0.0);
    CHECK(cut.eta(0.2) == doctest::Approx(1.0));
    CHECK(cut.eta(0.5) == 1.0);
    // monotone, in [0,1]
    double prev = -1;
    for (int i = 0; i <= 300; ++i) {
        double s = 0.3 * i / 300.0;
        double v = cut.eta(s);
        CHECK(v >= prev - 1e-15);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }
    // theta ordering: smaller theta gives the larger cutoff
    CutoffFamily small(0.05), big(0.1);
    for (int i = 1; i <= 40; ++i) {
        double s = 0.01 * i;
        CHECK(small.eta(s) >= big.eta(s) - 1e-15);
    }
}

TEST_CASE("ignition approximation") {
    auto f = make_logistic(1.0);
    auto fi = ignition_approx(f, 0.1);

    SUBCASE("vanishes below theta, equals f beyond 2 theta") {
        for (double u : {0.0, 0.02, 0.05, 0.1}) CHECK(fi(u) == 0.0);
        for (double u : {0.2, 0.3, 0.7, 1.0})
            CHECK(fi(u) == doctest::Approx(f(u)).epsilon(1e-12));
    }
    SUBCASE("passes the ignition classifier with rho close to theta") {
        auto c = classify(fi);
        CHECK(c.ignition);
        CHECK(c.rho >= 0.1 - 1e-4);
        CHECK(c.rho <= 0.1 * 1.03);
    }
    SUBCASE("pointwise convergence to f as theta drops") {
        double u = 0.15;
        double e1 = std::abs(ignition_approx(f, 0.12)(u) - f(u));
        (void)e1;
        CHECK(ignition_approx(f, 0.05)(u) == doctest::Approx(f(u))); // 2 theta < u
    }
    SUBCASE("monotone in theta: smaller theta keeps more of f") {
        auto f1 = ignition_approx(f, 0.05);
        auto f2 = ignition_approx(f, 0.1);
        for (int i = 0; i <= 1000; ++i) {
            double u = i / 1000.0;
            CHECK(f1(u) >= f2(u) - 1e-14);
            CHECK(f2(u) <= f(u) + 1e-14);
        }
    }
    SUBCASE("theta out of range") {
        CHECK_THROWS_AS(ignition_approx(f, 0.3), ConfigError);
        CHECK_THROWS_AS(ignition_approx(f, 0.0), ConfigError);
        CHECK_THROWS_AS(ignition_approx(make_ignition(0.3, 1.0), 0.1), ConfigError);
    }
}

TEST_CASE("g analysis") {
    SUBCASE("g monotone for weak reactions") {
        auto res = g_analysis(make_logistic(0.5)); // g' = 1 - 0.5 + u > 0
        CHECK(res.monotone);
        CHECK_FALSE(res.has_plateau);
    }
    SUBCASE("logistic r=1 has g'(0) = 0 but stays monotone") {
        auto res = g_analysis(make_logistic(1.0)); // g' = 2u >= 0
        CHECK(res.monotone);
        CHECK_FALSE(res.has_plateau);
    }
    SUBCASE("steep interior slope produces a level-matched plateau pair") {
        // f = 0.5 u(1-u)(1+6u): f'(0) = 0.5 < 1, max f' > 1
        auto f = make_cubic(0.5, 6.0);
        auto res = g_analysis(f);
        CHECK(res.has_plateau);
        CHECK(res.a < res.alpha_hat);
        CHECK(res.alpha_hat < res.beta_hat);
        CHECK(res.beta_hat < res.b);
        auto g = [&](double u) { return u - f(u); };
        CHECK(std::abs(g(res.a) - g(res.b)) <= 1e-8);
        // bisection oracle: g' changes sign exactly where reported
        auto gp = [&](double u) { return 1.0 - f.fp(u); };
        CHECK(std::abs(gp(res.alpha_hat)) < 1e-7);
        CHECK(std::abs(gp(res.beta_hat)) < 1e-7);
        // g' > 0 on the flanks at sampled points
        for (int i = 0; i <= 100; ++i) {
            CHECK(gp(res.a * i / 100.0) > 0);
            CHECK(gp(res.b + (1.0 - res.b) * i / 100.0) > 0);
        }
    }
}
