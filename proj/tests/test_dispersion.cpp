#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "frontlab/dispersion.hpp"
#include "frontlab/errors.hpp"

#include <cmath>
#include <functional>

using namespace frontlab;

namespace {

// Independent oracle: dense log-grid scan + interval refinement, applied to a
// closed-form curve. Never touches the implementation's minimizer.
double scan_minimize(const std::function<double(double)>& fn, double lo, double hi,
                     double* argmin = nullptr) {
    const int n = 512;
    double llo = std::log(lo), lhi = std::log(hi);
    int best = 0;
    double bx = lo, bf = fn(lo);
    for (int i = 0; i <= n; ++i) {
        double x = std::exp(llo + (lhi - llo) * i / n);
        double v = fn(x);
        if (v < bf) { bf = v; bx = x; best = i; }
    }
    (void)best;
    double a = bx * std::exp(-(lhi - llo) / n), b = bx * std::exp((lhi - llo) / n);
    while (b - a > 1e-10) {
        double x1 = a + (b - a) / 3, x2 = b - (b - a) / 3;
        if (fn(x1) < fn(x2)) b = x2; else a = x1;
    }
    if (argmin) *argmin = 0.5 * (a + b);
    return fn(0.5 * (a + b));
}

double bisect_root(const std::function<double(double)>& fn, double lo, double hi) {
    double flo = fn(lo);
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi), fm = fn(mid);
        if ((flo < 0) == (fm < 0)) { lo = mid; flo = fm; } else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// frozen oracle outputs (grid-scan on the closed forms, refined to 1e-10)
constexpr double kC1Uniform = 0.905261739369058;
constexpr double kLambdaStarUniform = 1.915008063798876;
constexpr double kC1Shifted = -0.346550838757034;
constexpr double kLambda12 = 0.970427822147396;

} // namespace

TEST_CASE("c1 on the symmetric uniform kernel matches the closed-form oracle") {
    auto k = build_kernel(KernelFamily::uniform(-1, 1), 0.001);
    auto f = make_logistic(1.0);
    auto res = c1(k, f);
    REQUIRE(res.attained);

    double lam_oracle = 0;
    double oracle = scan_minimize([](double l) { return std::sinh(l) / (l * l); }, 1e-4, 10,
                                  &lam_oracle);
    CHECK(oracle == doctest::Approx(kC1Uniform).epsilon(1e-12));
    CHECK(lam_oracle == doctest::Approx(kLambdaStarUniform).epsilon(1e-8));

    CHECK(std::abs(res.speed - oracle) < 1e-6);
    CHECK(std::abs(*res.lambda_star - lam_oracle) < 1e-3);

    // speed <= c(lambda) for every sampled lambda
    for (std::size_t i = 0; i < res.curve.lambda.size(); ++i)
        CHECK(res.speed <= res.curve.c[i] + 1e-12);
    // the curve derivative vanishes at the attained minimizer
    auto c_of = [&](double l) { return (k.mgf(l) + f.fprime0 - 1.0) / l; };
    double d = 1e-5;
    CHECK(std::abs(c_of(*res.lambda_star + d) - c_of(*res.lambda_star - d)) / (2 * d) <=
          1e-8);
    // blow-up as lambda -> 0+ when f'(0) > 0
    CHECK(res.curve.c.front() > res.speed + 1.0);
}

TEST_CASE("negative minimal speed for the rightward-shifted uniform kernel") {
    auto k = build_kernel(KernelFamily::uniform(1, 3), 0.002);
    auto f = make_logistic(0.5); // f'(0) = 0.5
    auto res = c1(k, f);
    REQUIRE(res.attained);
    double oracle = scan_minimize(
        [](double l) { return ((std::exp(-l) - std::exp(-3 * l)) / (2 * l) - 0.5) / l; },
        1e-4, 10);
    CHECK(oracle == doctest::Approx(kC1Shifted).epsilon(1e-10));
    CHECK(std::abs(res.speed - oracle) < 1e-3);
    CHECK(res.speed < 0);
    CHECK(*res.lambda_star == doctest::Approx(0.863278782144936).epsilon(1e-2));
}

TEST_CASE("boundary infimum is reported as not attained") {
    // uniform[1,3] with f'(0)=1: c(lambda) = M(lambda)/lambda decreases to 0+
    auto k = build_kernel(KernelFamily::uniform(1, 3), 0.01);
    auto res = c1(k, make_logistic(1.0));
    CHECK_FALSE(res.attained);
    CHECK(res.speed >= 0);
    CHECK(res.speed < 1e-3);
    CHECK_FALSE(res.warning.empty());
}

TEST_CASE("reflection duality across the kernel suite") {
    auto f = make_logistic(1.0);
    std::vector<KernelFamily> suite = {
        KernelFamily::uniform(-1, 1), KernelFamily::uniform(1, 3),
        KernelFamily::bump(0.5, 1.0), KernelFamily::gaussian(0.3, 0.8),
        KernelFamily::mixture({{KernelTag::Uniform, 0.4, -2.0, -0.5, 0, 1, 0, 1},
                               {KernelTag::Bump, 0.6, 0, 0, 1.0, 0.7, 0, 1}})};
    for (const auto& fam : suite) {
        auto k = build_kernel(fam, 0.01);
        auto lhs = c_star_left(k, f);
        auto rhs = c1(reflect(k), f);
        CHECK(std::abs(lhs.speed - rhs.speed) < 1e-10);
        CHECK(lhs.attained == rhs.attained);
    }
    // symmetric kernel: reflection is a fixed point, c_star_left == c1
    auto ks = build_kernel(KernelFamily::uniform(-1, 1), 0.01);
    CHECK(std::abs(c_star_left(ks, f).speed - c1(ks, f).speed) < 1e-10);
}

TEST_CASE("Jensen sign: symmetric kernels give positive c1") {
    std::vector<KernelFamily> sym = {
        KernelFamily::uniform(-1, 1), KernelFamily::uniform(-2, 2),
        KernelFamily::bump(0, 1), KernelFamily::gaussian(0, 0.7),
        KernelFamily::gaussian(0, 1.5),
        KernelFamily::mixture({{KernelTag::Bump, 0.5, 0, 0, -1.5, 0.5, 0, 1},
                               {KernelTag::Bump, 0.5, 0, 0, 1.5, 0.5, 0, 1}})};
    for (const auto& fam : sym)
        for (double fp0 : {0.5, 1.0, 2.0}) {
            auto res = c1(build_kernel(fam, 0.01), make_logistic(fp0));
            CHECK(res.speed > 0);
        }
}

TEST_CASE("c1 is non-increasing under rightward kernel shifts") {
    auto f = make_logistic(1.0);
    double prev = 1e300;
    for (double s : {0.0, 1.0, 2.0}) {
        auto res = c1(build_kernel(KernelFamily::uniform(-1 + s, 1 + s), 0.01), f);
        CHECK(res.speed <= prev + 1e-12);
        prev = res.speed;
    }
}

TEST_CASE("c1 reports Mollison violation for fat tails") {
    auto fat = build_kernel(KernelFamily::algebraic_tail(3.0), 0.05);
    CHECK_THROWS_AS((void)c1(fat, make_logistic(1.0)), NumericalError);
}

TEST_CASE("lambda_of_c") {
    auto k = build_kernel(KernelFamily::uniform(-1, 1), 0.002);
    auto f = make_logistic(1.0);
    auto base = c1(k, f);

    SUBCASE("double root at the minimal speed") {
        auto root = lambda_of_c(k, f, base.speed);
        CHECK(root.multiplicity == RootMultiplicity::Double);
        CHECK(root.lambda == doctest::Approx(*base.lambda_star));
        // phi and its central-difference derivative both vanish at lambda*
        auto phi = [&](double l) { return -base.speed * l + k.mgf(l) + f.fprime0 - 1.0; };
        CHECK(std::abs(phi(root.lambda)) < 1e-6);
        double d = 1e-5;
        CHECK(std::abs((phi(root.lambda + d) - phi(root.lambda - d)) / (2 * d)) < 1e-6);
    }
    SUBCASE("simple root below lambda* for supercritical speeds") {
        auto root = lambda_of_c(k, f, 1.2);
        CHECK(root.multiplicity == RootMultiplicity::Simple);
        CHECK(root.lambda < *base.lambda_star);
        // bisection oracle on the closed form
        double oracle = bisect_root(
            [](double l) { return -1.2 * l + std::sinh(l) / l; }, 1e-8, 1.915);
        CHECK(oracle == doctest::Approx(kLambda12).epsilon(1e-9));
        CHECK(std::abs(root.lambda - oracle) < 1e-4);
    }
    SUBCASE("large speeds give a small root with negative phi slope") {
        double c = base.speed + 10.0;
        auto root = lambda_of_c(k, f, c);
        CHECK(root.lambda < 0.2);
        auto phi = [&](double l) { return -c * l + k.mgf(l) + f.fprime0 - 1.0; };
        double d = 1e-6;
        CHECK((phi(root.lambda + d) - phi(root.lambda - d)) / (2 * d) < 0);
    }
    SUBCASE("speeds below c1 have no positive root") {
        CHECK_THROWS_AS((void)lambda_of_c(k, f, base.speed - 0.05), NumericalError);
    }
    SUBCASE("root consistency for 20 deterministic supercritical speeds") {
        unsigned long long state = 12345;
        for (int i = 0; i < 20; ++i) {
            state = state * 6364136223846793005ULL + 1442695040888963407ULL;
            double u = static_cast<double>(state >> 11) / 9007199254740992.0;
            double c = base.speed + 0.05 + 3.0 * u;
            auto root = lambda_of_c(k, f, c);
            double phi = -c * root.lambda + k.mgf(root.lambda) + f.fprime0 - 1.0;
            CHECK(std::abs(phi) < 1e-9);
        }
    }
}

TEST_CASE("ignition speed bracket") {
    auto k = build_kernel(KernelFamily::uniform(-1, 1), 0.01);
    CHECK(speed_bracket(k, make_ignition(0.3, 1.0)) ==
          doctest::Approx(0.5 / 0.3).epsilon(1e-3));
    CHECK(speed_bracket(k, make_ignition(0.5, 1.0)) ==
          doctest::Approx(2.0 * 0.5).epsilon(1e-2));
    // bound blows up as rho -> 0
    CHECK(speed_bracket(k, make_ignition(0.01, 1.0)) >
          20.0 * speed_bracket(k, make_ignition(0.5, 1.0)));
    CHECK_THROWS_AS(speed_bracket(k, make_logistic(1.0)), ConfigError);
}

TEST_CASE("constructed supersolution verifies") {
    auto k = build_kernel(KernelFamily::uniform(-1, 1), 0.01);
    auto f = make_logistic(1.0);
    auto w = build_supersolution(k, f, 1.0, 0.5, 4.0);

    CHECK(w.value(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(w.kappa >= w.kappa0);
    CHECK(w.kappa >= w.kappa1);

    // monotone and under the exponential ceiling
    double prev = -1;
    for (int i = -800; i <= 800; ++i) {
        double x = i * 0.01;
        double v = w.value(x);
        CHECK(v >= prev - 1e-12);
        CHECK(v <= std::exp(1.0 * x) + 1e-12);
        CHECK(v <= 1.0 + 1e-12);
        prev = v;
    }

    auto rep = verify_supersolution(w, w.kappa, k, f);
    CHECK(rep.ok);
    CHECK(rep.worst_violation <= 1e-8);
}

TEST_CASE("KPP exponential supersolution on and off the dispersion curve") {
    auto k = build_kernel(KernelFamily::uniform(-1, 1), 0.01);
    auto f = make_logistic(1.0);
    const double lam = 1.2;
    const double c_on = (k.mgf(lam) + f.fprime0 - 1.0) / lam;

    auto wexp = [lam](double x) { return std::min(std::exp(lam * x), 1.0); };
    auto wexp_p = [lam](double x) { return x < 0 ? lam * std::exp(lam * x) : 0.0; };

    auto ok = verify_supersolution(wexp, wexp_p, c_on, k, f, -30, 30);
    CHECK(ok.ok);

    auto bad = verify_supersolution(wexp, wexp_p, c_on - 0.1, k, f, -30, 30);
    CHECK_FALSE(bad.ok);
    CHECK(bad.worst_violation > 1e-4);
    CHECK(bad.location < 0); // defect localizes on the left tail
}

TEST_CASE("trivial supersolution checks") {
    auto k = build_kernel(KernelFamily::uniform(-1, 1), 0.01);
    auto f = make_logistic(1.0);
    // constant w == 1: defect is exactly f(1) = 0
    auto rep = verify_supersolution([](double) { return 1.0; }, [](double) { return 0.0; },
                                    3.7, k, f, -10, 10);
    CHECK(rep.ok);
    CHECK(std::abs(rep.worst_violation) < 1e-12);
}
