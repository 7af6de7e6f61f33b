#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "frontlab/errors.hpp"
#include "frontlab/kernels.hpp"

#include <cmath>

using namespace frontlab;

namespace {

// Closed-form oracles for the uniform density on [a,b] (independent of the
// trapezoid code path).
double uniform_mean(double a, double b) { return 0.5 * (a + b); }
double uniform_nu(double a, double b) {
    // integral |x|/(b-a) over [a,b]
    auto F = [](double x) { return 0.5 * x * std::abs(x); };
    return (F(b) - F(a)) / (b - a);
}
double uniform_alpha(double a, double b) {
    return 0.5 * (b * b * b - a * a * a) / (3.0 * (b - a));
}

} // namespace

TEST_CASE("uniform kernel moments match closed-form oracles") {
    auto k = build_kernel(KernelFamily::uniform(-1, 1), 0.01);
    CHECK(k.moments().mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(k.moments().mean - uniform_mean(-1, 1)) < 1e-14); // symmetric samples
    CHECK(std::abs(k.moments().nu - uniform_nu(-1, 1)) < 5e-5);
    CHECK(std::abs(k.moments().alpha - uniform_alpha(-1, 1)) < 5e-5);
    CHECK(std::abs(k.moments().beta) < 1e-14);
    CHECK(uniform_nu(-1, 1) == doctest::Approx(0.5));
    CHECK(uniform_alpha(-1, 1) == doctest::Approx(1.0 / 6.0));

    auto ks = build_kernel(KernelFamily::uniform(1, 3), 0.01);
    CHECK(std::abs(ks.moments().mean - 2.0) < 1e-4);
    CHECK(std::abs(ks.moments().beta - (-2.0)) < 1e-4);
}

TEST_CASE("moment quadrature converges at least at second order under h-halving") {
    // jump-edged family: trapezoid error is genuinely O(h^2)
    double exact = uniform_alpha(-1, 1);
    double e1 = std::abs(build_kernel(KernelFamily::uniform(-1, 1), 0.04).moments().alpha - exact);
    double e2 = std::abs(build_kernel(KernelFamily::uniform(-1, 1), 0.02).moments().alpha - exact);
    CHECK(e2 < 0.35 * e1 + 1e-12);

    // smooth family: already near roundoff, halving must not make it worse
    auto g = KernelFamily::gaussian(0.3, 0.8);
    double g1 = std::abs(build_kernel(g, 0.04).moments().mean - 0.3);
    double g2 = std::abs(build_kernel(g, 0.02).moments().mean - 0.3);
    CHECK(g2 < std::max(0.35 * g1, 1e-10));
}

TEST_CASE("mgf against closed forms") {
    auto k = build_kernel(KernelFamily::uniform(-1, 1), 0.01);
    // closed form sinh(lambda)/lambda
    CHECK(std::abs(k.mgf(1.0) - std::sinh(1.0)) < 2e-5);
    CHECK(std::abs(k.mgf(1.0) - 1.175201193643801) < 2e-5);
    CHECK(std::abs(k.mgf(0.0) - 1.0) < 1e-10);

    auto ks = build_kernel(KernelFamily::uniform(1, 3), 0.01);
    // closed form (e^-1 - e^-3)/2
    CHECK(std::abs(ks.mgf(1.0) - 0.159046186401789) < 2e-5);

    // quadrature cross-validates the analytic fast path
    CHECK(std::abs(k.mgf(0.7) - k.family()->analytic_mgf(0.7)) < 2e-5);
    auto kg = build_kernel(KernelFamily::gaussian(0.0, 0.5), 0.005);
    CHECK(std::abs(kg.mgf(1.3) - kg.family()->analytic_mgf(1.3)) < 1e-6);
}

TEST_CASE("mgf overflow is signalled, not returned as infinity") {
    auto k = build_kernel(KernelFamily::uniform(-1, 1), 0.01);
    CHECK_THROWS_AS((void)k.mgf(1e4), NumericalError);
}

TEST_CASE("mollison check by family") {
    auto u = build_kernel(KernelFamily::uniform(-1, 1), 0.01);
    CHECK(mollison_check(u).satisfied);
    CHECK(mollison_check(u).witness_lambda > 0);

    auto fat = build_kernel(KernelFamily::algebraic_tail(3.0), 0.05);
    CHECK_FALSE(mollison_check(fat).satisfied);

    auto g = build_kernel(KernelFamily::gaussian(0, 1), 0.01);
    CHECK(mollison_check(g).satisfied);
}

TEST_CASE("algebraic tail family guards") {
    CHECK_THROWS_AS(KernelFamily::algebraic_tail(0.9), ConfigError);  // not normalizable
    CHECK_THROWS_AS(KernelFamily::algebraic_tail(1.5), ConfigError);  // nu = infinity
    CHECK_THROWS_AS(KernelFamily::uniform(2, 1), ConfigError);
    CHECK_THROWS_AS(KernelFamily::gaussian(0, -1), ConfigError);
}

TEST_CASE("reflection") {
    auto ks = build_kernel(KernelFamily::uniform(1, 3), 0.01);
    auto kr = reflect(ks);
    CHECK(kr.declared_support().first == doctest::Approx(-3.0));
    CHECK(kr.declared_support().second == doctest::Approx(-1.0));
    CHECK(std::abs(kr.moments().mean - (-ks.moments().mean)) < 1e-12);

    auto sym = build_kernel(KernelFamily::uniform(-1, 1), 0.01);
    auto symr = reflect(sym);
    for (int i = -sym.radius_index(); i <= sym.radius_index(); ++i)
        CHECK(sym.value_at_offset(i) == symr.value_at_offset(i));

    // reflect . reflect == identity on samples
    auto back = reflect(kr);
    for (int i = -ks.radius_index(); i <= ks.radius_index(); ++i)
        CHECK(ks.value_at_offset(i) == back.value_at_offset(i));
}

TEST_CASE("mgf duality: mgf(reflect(J), lambda) equals the rightward integrand") {
    auto ks = build_kernel(KernelFamily::uniform(1, 3), 0.01);
    auto kr = reflect(ks);
    for (double lam : {0.3, 0.9, 1.7}) {
        // integral J(x) e^(lambda x) dx == mgf of J at -lambda
        CHECK(std::abs(kr.mgf(lam) - ks.mgf(-lam)) < 1e-12);
    }
}

TEST_CASE("Jensen: symmetric kernels have M(lambda) >= 1 on a lambda grid") {
    for (auto fam : {KernelFamily::uniform(-1, 1), KernelFamily::bump(0, 1),
                     KernelFamily::gaussian(0, 0.7)}) {
        auto k = build_kernel(fam, 0.01);
        for (int i = 1; i <= 20; ++i) {
            double lam = 0.2 * i;
            CHECK(k.mgf(lam) >= 1.0 - 1e-9);
            CHECK(std::abs(k.mgf(lam) - k.mgf(-lam)) < 1e-8);
        }
    }
}

TEST_CASE("tail truncation bookkeeping") {
    auto g = build_kernel(KernelFamily::gaussian(0, 1), 0.01);
    CHECK(g.truncated());
    CHECK(g.omitted_mass() < 1e-11);
    CHECK(g.sample_radius() > 6.5);
    CHECK(g.max_reliable_lambda() > 1.0);
    CHECK(g.max_reliable_lambda() < 50.0);

    auto u = build_kernel(KernelFamily::uniform(-1, 1), 0.01);
    CHECK_FALSE(u.truncated());
    CHECK(u.max_reliable_lambda() == doctest::Approx(50.0));

    // fat tail: the 1e-12 radius is impractically far; the cap binds and the
    // omitted mass is recorded honestly
    auto fat = build_kernel(KernelFamily::algebraic_tail(3.0), 0.05, 0.0, 80.0);
    CHECK(fat.truncated());
    CHECK(fat.omitted_mass() > 1e-6);
    CHECK(fat.truncation_radius() > 1e5);
}

TEST_CASE("prefix masses split the unit mass consistently") {
    auto k = build_kernel(KernelFamily::uniform(-1, 1), 0.01);
    int n = k.radius_index();
    CHECK(k.prefix_mass(-n - 1) == 0.0);
    CHECK(k.prefix_mass(n) == doctest::Approx(1.0).epsilon(1e-14));
    // symmetric kernel: half the mass sits beyond the midpoint
    CHECK(k.prefix_mass(0) == doctest::Approx(0.5).epsilon(1e-12));
    for (int m : {-50, -10, 7, 42}) {
        double lo = k.prefix_mass(m);
        double hi = k.upper_tail_from(m);
        CHECK(lo + hi == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("projection of planar gaussians onto a direction") {
    DirectionalDensity d;
    d.dim = 2;
    d.sigma = {1.0, 1.0, 1.0};

    SUBCASE("isotropic: marginal keeps the variance") {
        auto k = project_direction(d, {1, 0, 0}, 0.02);
        CHECK(std::abs(k.moments().mean) < 1e-8);
        CHECK(std::abs(2.0 * k.moments().alpha - 1.0) < 1e-4); // variance 1
        // density values match the 1-D gaussian
        for (double x : {0.0, 0.5, 1.5}) {
            int i = static_cast<int>(std::lround(x / 0.02));
            double expected = std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI);
            CHECK(std::abs(k.value_at_offset(i) - expected) < 1e-6);
        }
    }
    SUBCASE("shift along e survives projection") {
        d.mean = {2.0, 0.0, 0.0};
        auto k = project_direction(d, {1, 0, 0}, 0.02);
        CHECK(std::abs(k.moments().mean - 2.0) < 1e-6);
    }
    SUBCASE("shift orthogonal to e vanishes") {
        d.mean = {2.0, 0.0, 0.0};
        auto k = project_direction(d, {0, 1, 0}, 0.02);
        CHECK(std::abs(k.moments().mean) < 1e-8);
        CHECK(std::abs(2.0 * k.moments().alpha - 1.0) < 1e-4);
    }
    SUBCASE("oblique direction in 3-D mixes the axis variances") {
        DirectionalDensity d3;
        d3.dim = 3;
        d3.sigma = {1.0, 0.5, 0.5};
        double s = 1.0 / std::sqrt(2.0);
        auto k = project_direction(d3, {s, s, 0}, 0.05);
        // var = e1^2 s1^2 + e2^2 s2^2 = 0.5 + 0.125
        CHECK(std::abs(2.0 * k.moments().alpha - 0.625) < 5e-3);
    }
    SUBCASE("non-unit direction is rejected") {
        CHECK_THROWS_AS(project_direction(d, {1, 1, 0}, 0.02), ConfigError);
    }
}
