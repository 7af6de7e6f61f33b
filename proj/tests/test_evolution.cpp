#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "frontlab/errors.hpp"
#include "frontlab/evolution.hpp"
#include "frontlab/profile_solver.hpp"

#include <cmath>

using namespace frontlab;

namespace {
const double kC1Uniform = 0.905261739369058;

double lcg_uniform(unsigned long long& state) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) / 9007199254740992.0;
}
} // namespace

TEST_CASE("equilibria are fixed points of the stepper") {
    Stepper st(build_kernel(KernelFamily::uniform(-1, 1), 0.05), make_logistic(1.0));
    for (double level : {0.0, 1.0}) {
        SimState s;
        s.h = 0.05;
        s.x_left = -10;
        s.U.assign(401, level);
        s.ext_left = level;
        s.ext_right = level;
        double dt = st.default_dt();
        for (int k = 0; k < 100; ++k) st.step(s, dt);
        for (double v : s.U) CHECK(std::abs(v - level) <= 1e-12);
    }
}

TEST_CASE("comparison principle on ordered pairs") {
    Stepper st(build_kernel(KernelFamily::uniform(-1, 1), 0.05), make_logistic(1.0));
    unsigned long long seed = 99;
    SimState a, b;
    a.h = b.h = 0.05;
    a.x_left = b.x_left = -10;
    a.U.resize(401);
    b.U.resize(401);
    a.ext_left = b.ext_left = 0;
    a.ext_right = b.ext_right = 1;
    for (std::size_t i = 0; i < a.U.size(); ++i) {
        double u = lcg_uniform(seed);
        double gap = 0.5 * lcg_uniform(seed);
        a.U[i] = std::min(u, 1.0 - gap);
        b.U[i] = a.U[i] + gap;
    }
    double dt = st.default_dt();
    for (int k = 0; k < 100; ++k) {
        st.step(a, dt);
        st.step(b, dt);
    }
    for (std::size_t i = 0; i < a.U.size(); ++i) CHECK(a.U[i] <= b.U[i] + 1e-12);
}

TEST_CASE("synthetic tracks") {
    SUBCASE("linear track reproduces its slope exactly") {
        FrontTrack t;
        for (int i = 0; i < 30; ++i) {
            t.times.push_back(0.5 * i);
            t.positions.push_back(3.0 + 0.9 * (0.5 * i));
        }
        auto fit = measure_speed(t, 0, 15);
        CHECK(fit.speed == doctest::Approx(0.9).epsilon(1e-12));
        CHECK(fit.residual <= 1e-12);
    }
    SUBCASE("quadratic track: dyadic-window slope ratio is 2") {
        FrontTrack t;
        for (int i = 0; i <= 200; ++i) {
            double tt = 0.1 * i; // spans [0, 20] = [0, 2T] with T = 10
            t.times.push_back(tt);
            t.positions.push_back(tt * tt);
        }
        auto rep = accelerating_detector(t);
        CHECK(rep.accelerating);
        CHECK(rep.speed_ratio == doctest::Approx(2.0).epsilon(0.01));
    }
    SUBCASE("stationary track") {
        FrontTrack t;
        for (int i = 0; i < 40; ++i) {
            t.times.push_back(i * 0.5);
            t.positions.push_back(1.25);
        }
        auto fit = measure_speed(t, 0, 20);
        CHECK(std::abs(fit.speed) <= 1e-14);
    }
    SUBCASE("insufficient samples are rejected") {
        FrontTrack t;
        for (int i = 0; i < 10; ++i) {
            t.times.push_back(i);
            t.positions.push_back(i);
        }
        CHECK_THROWS_AS(measure_speed(t, 0, 9), NumericalError);
    }
}

TEST_CASE("a translated converged profile moves at its own speed") {
    const double h = 0.04;
    auto k = build_kernel(KernelFamily::uniform(-1, 1), h);
    auto f = make_logistic(1.0);
    Grid g{h, 32, 32};
    double c = 1.2 * kC1Uniform;
    auto cont = viscosity_continuation(k, f, g, c, 1e-7);

    Stepper st(k, f);
    SimState s;
    s.h = h;
    s.x_left = -32;
    s.U = cont.profile.u;
    s.ext_left = 0;
    s.ext_right = 1;
    FrontTrack track;
    track_front(track, s);
    double dt = st.default_dt();
    while (s.t < 14.0) {
        st.step(s, dt);
        track_front(track, s);
    }
    auto fit = measure_speed(track, 2.0, 14.0);
    // traveling-wave convention: position drifts at -c
    CHECK(std::abs(-fit.speed - c) <= std::max(0.05 * c, 3 * h));
    CHECK(fit.residual <= 0.2);
}

TEST_CASE("KPP front selects the minimal speed from step data") {
    auto k = build_kernel(KernelFamily::uniform(-1, 1), 0.05);
    Stepper st(k, make_logistic(1.0));
    EvolveParams p;
    p.T = 60;
    p.window_left = -60;
    p.window_right = 30;
    auto res = run_evolution(st, p);
    CHECK(std::abs(res.measured_speed - kC1Uniform) / kC1Uniform <= 0.05);
    CHECK_FALSE(res.accelerating);
    CHECK(res.speed_ratio > 0.9);
    CHECK(res.speed_ratio < 1.1);
}

TEST_CASE("window independence of the measured speed") {
    auto k = build_kernel(KernelFamily::uniform(-1, 1), 0.05);
    Stepper st(k, make_logistic(1.0));
    EvolveParams p1;
    p1.T = 40;
    p1.window_left = -50;
    p1.window_right = 25;
    EvolveParams p2 = p1;
    p2.window_left = -100;
    p2.window_right = 50;
    auto r1 = run_evolution(st, p1);
    auto r2 = run_evolution(st, p2);
    CHECK(std::abs(r1.measured_speed - r2.measured_speed) /
              std::abs(r2.measured_speed) <
          0.005);
}

TEST_CASE("fat-tailed kernel accelerates while compact control does not") {
    const double h = 0.05;
    // sampled reach must cover the whole window for the fat tail
    auto fat = build_kernel(KernelFamily::algebraic_tail(3.0), h, 440.0, 100.0);
    Stepper st(fat, make_logistic(1.0));
    EvolveParams p;
    p.T = 16;
    p.dt = 0.1;
    p.window_left = -400;
    p.window_right = 40;
    p.track_every = 0.1;
    auto res = run_evolution(st, p);
    CHECK(res.accelerating);
    CHECK(res.speed_ratio >= 1.10);
}

TEST_CASE("local limit expansion") {
    auto k = build_kernel(KernelFamily::uniform(-1, 1), 0.002);

    SUBCASE("gaussian test function: error/eps^2 decreases as eps halves") {
        auto phi = TestFunction::gaussian_bump();
        double prev = 1e300;
        for (double eps : {0.4, 0.2, 0.1, 0.05}) {
            double e = local_limit_error(k, eps, phi) / (eps * eps);
            CHECK(e < prev);
            prev = e;
        }
    }
    SUBCASE("linear test functions are reproduced through beta exactly") {
        TestFunction lin;
        lin.value = [](double x) { return 0.3 + 0.7 * x; };
        lin.d1 = [](double) { return 0.7; };
        lin.d2 = [](double) { return 0.0; };
        CHECK(local_limit_error(k, 0.2, lin) <= 1e-10);
        // asymmetric kernel: the drift term carries the whole first moment
        auto ks = build_kernel(KernelFamily::uniform(1, 3), 0.002);
        CHECK(local_limit_error(ks, 0.1, lin) <= 1e-10);
    }
    SUBCASE("quadratics are captured by the second moment") {
        TestFunction quad;
        quad.value = [](double x) { return x * x; };
        quad.d1 = [](double x) { return 2 * x; };
        quad.d2 = [](double) { return 2.0; };
        CHECK(local_limit_error(k, 0.25, quad) <= 1e-9);
    }
    SUBCASE("eps out of range and unresolved kernels are rejected") {
        auto phi = TestFunction::gaussian_bump();
        CHECK_THROWS_AS(local_limit_error(k, 0.7, phi), ConfigError);
        auto coarse = build_kernel(KernelFamily::uniform(-1, 1), 0.05);
        CHECK_THROWS_AS(local_limit_error(coarse, 0.05, phi), ConfigError);
    }
}
