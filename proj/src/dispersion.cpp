#include "frontlab/dispersion.hpp"
#include "frontlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace frontlab {

namespace {

constexpr double kLambdaMin = 1e-4;
constexpr int kScanPoints = 512;

double oriented_mgf(const SampledKernel& k, Orientation o, double lambda) {
    return k.mgf(o == Orientation::Leftward ? lambda : -lambda);
}

bool oriented_edge_ok(const SampledKernel& k, Orientation o, double lambda) {
    try {
        return k.mgf_edge_ok(o == Orientation::Leftward ? lambda : -lambda);
    } catch (const NumericalError&) {
        return false;
    }
}

double reliable_lambda_bound(const SampledKernel& k, Orientation o) {
    if (!k.truncated()) return 50.0;
    double last_ok = 0.0, first_bad = -1.0;
    for (int i = 1; i <= 256; ++i) {
        double lam = 50.0 * i / 256.0;
        if (oriented_edge_ok(k, o, lam)) last_ok = lam;
        else { first_bad = lam; break; }
    }
    if (first_bad < 0) return 50.0;
    if (last_ok == 0.0) return 0.0;
    double lo = last_ok, hi = first_bad;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (oriented_edge_ok(k, o, mid)) lo = mid; else hi = mid;
    }
    return lo;
}

SpeedResult minimize_curve(const SampledKernel& kernel, const Nonlinearity& f,
                           Orientation orientation) {
    if (!(f.fprime0 > 0))
        throw ConfigError("speed formulas need f'(0) > 0");
    auto mol = mollison_check(kernel);
    if (!mol.satisfied)
        throw NumericalError(
            "Mollison violated - no finite speed; expect accelerating waves for this kernel");

    const double lambda_max = reliable_lambda_bound(kernel, orientation);
    if (!(lambda_max > kLambdaMin))
        throw NumericalError("MGF not evaluable on any usable lambda range");

    const double fp0m1 = f.fprime0 - 1.0; // grouped so tiny MGF values survive
    auto c_of = [&](double lam) {
        return (oriented_mgf(kernel, orientation, lam) + fp0m1) / lam;
    };

    SpeedResult res;
    res.lambda_max = lambda_max;
    res.curve.orientation = orientation;
    res.curve.lambda.reserve(kScanPoints + 1);
    res.curve.c.reserve(kScanPoints + 1);

    const double llo = std::log(kLambdaMin), lhi = std::log(lambda_max);
    int best = 0;
    for (int i = 0; i <= kScanPoints; ++i) {
        double lam = std::exp(llo + (lhi - llo) * i / kScanPoints);
        double c = c_of(lam);
        res.curve.lambda.push_back(lam);
        res.curve.c.push_back(c);
        if (c < res.curve.c[best]) best = i;
    }

    if (best == kScanPoints) {
        // infimum sits at the boundary of the evaluable range
        res.speed = res.curve.c.back();
        res.lambda_star = std::nullopt;
        res.attained = false;
        res.warning = "minimum reached the lambda_max boundary; infimum may not be attained";
        return res;
    }

    double a = (best == 0) ? kLambdaMin : res.curve.lambda[best - 1];
    double b = res.curve.lambda[best + 1];
    // golden-section refinement of the bracketed minimum
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = c_of(x1), f2 = c_of(x2);
    for (int it = 0; it < 90 && (b - a) > 1e-13 * std::max(1.0, b); ++it) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a); f1 = c_of(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a); f2 = c_of(x2);
        }
    }
    double lam_star = 0.5 * (a + b);
    // Newton steps on the finite-difference derivative sharpen the minimizer
    // past the flat-basin floor of the bracketing search
    for (int it = 0; it < 3; ++it) {
        double d = 1e-4 * std::max(1.0, lam_star);
        double der = (c_of(lam_star + d) - c_of(lam_star - d)) / (2 * d);
        double der2 = (c_of(lam_star + d) - 2 * c_of(lam_star) + c_of(lam_star - d)) / (d * d);
        if (!(der2 > 0)) break;
        double next = lam_star - der / der2;
        if (!(next > kLambdaMin && next < lambda_max)) break;
        lam_star = next;
    }
    res.speed = c_of(lam_star);
    res.lambda_star = lam_star;
    res.attained = lam_star < lambda_max * (1.0 - 1e-6);
    if (!res.attained)
        res.warning = "minimizer sits at the lambda_max boundary within tolerance";
    return res;
}

} // namespace

SpeedResult c1(const SampledKernel& kernel, const Nonlinearity& f) {
    return minimize_curve(kernel, f, Orientation::Leftward);
}

SpeedResult c_star_left(const SampledKernel& kernel, const Nonlinearity& f) {
    return minimize_curve(kernel, f, Orientation::Rightward);
}

LambdaRoot lambda_of_c(const SampledKernel& kernel, const Nonlinearity& f, double c) {
    SpeedResult base = c1(kernel, f);
    if (!base.attained || !base.lambda_star)
        throw NumericalError("lambda_of_c requires an attained minimal speed");
    if (c < base.speed - 1e-9)
        throw NumericalError("no positive root: speed below the minimal speed");
    if (std::abs(c - base.speed) <= 1e-6)
        return {*base.lambda_star, RootMultiplicity::Double};

    const double fp0m1 = f.fprime0 - 1.0;
    auto phi = [&](double lam) { return -c * lam + (kernel.mgf(lam) + fp0m1); };
    double lo = 1e-8, hi = *base.lambda_star;
    double flo = phi(lo), fhi = phi(hi);
    if (!(flo > 0 && fhi < 0))
        throw NumericalError("lambda_of_c failed to bracket the minimal root");
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi), fm = phi(mid);
        if ((flo < 0) == (fm < 0)) { lo = mid; flo = fm; } else hi = mid;
    }
    return {0.5 * (lo + hi), RootMultiplicity::Simple};
}

double speed_bracket(const SampledKernel& kernel, const Nonlinearity& f_ignition) {
    auto c = classify(f_ignition);
    if (!c.ignition) throw ConfigError("speed_bracket requires an ignition nonlinearity");
    if (!(c.rho > 0 && c.rho < 1)) throw ConfigError("ignition threshold must lie in (0,1)");
    double mu = std::min(c.rho, 1.0 - c.rho);
    return kernel.moments().nu / mu;
}

// --- supersolution -----------------------------------------------------------

namespace {

// quintic with value/derivative/curvature prescribed at both ends of [x0, x1]
std::array<double, 6> hermite5(double x0, double x1, double v0, double d0, double s0,
                               double v1, double d1, double s1) {
    // coefficients in the scaled variable t = (x - x0)/(x1 - x0)
    double L = x1 - x0;
    double V0 = v0, D0 = d0 * L, S0 = s0 * L * L;
    double V1 = v1, D1 = d1 * L, S1 = s1 * L * L;
    std::array<double, 6> c{};
    c[0] = V0;
    c[1] = D0;
    c[2] = 0.5 * S0;
    c[3] = -10 * V0 - 6 * D0 - 1.5 * S0 + 10 * V1 - 4 * D1 + 0.5 * S1;
    c[4] = 15 * V0 + 8 * D0 + 1.5 * S0 - 15 * V1 + 7 * D1 - S1;
    c[5] = -6 * V0 - 3 * D0 - 0.5 * S0 + 6 * V1 - 3 * D1 + 0.5 * S1;
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

double poly_deriv2(const std::array<double, 6>& c, double t) {
    double r = 0;
    for (int i = 5; i >= 2; --i) r = r * t + i * (i - 1) * c[static_cast<std::size_t>(i)];
    return r;
}

} // namespace

double Supersolution::value(double x) const {
    if (x <= -N) return std::exp(lambda * x);
    if (x >= N) return 1.0 - std::exp(-delta * x);
    if (x <= 0) {
        double t = (x + N) / N;
        double psi = 0.5 * poly_eval(left_coef, t);
        return std::exp(lambda * x) * (1.0 - psi);
    }
    double u = 1.0 - x / N;
    double chi = 0.5 * poly_eval(right_coef, u);
    return 1.0 - std::exp(-delta * x) * (1.0 - chi);
}

double Supersolution::derivative(double x) const {
    if (x <= -N) return lambda * std::exp(lambda * x);
    if (x >= N) return delta * std::exp(-delta * x);
    if (x <= 0) {
        double t = (x + N) / N;
        double psi = 0.5 * poly_eval(left_coef, t);
        double psip = 0.5 * poly_deriv(left_coef, t) / N;
        return std::exp(lambda * x) * (lambda * (1.0 - psi) - psip);
    }
    double u = 1.0 - x / N;
    double chi = 0.5 * poly_eval(right_coef, u);
    double qrp = 0.5 * poly_deriv(right_coef, u) / N; // = d(1-chi)/dx
    return std::exp(-delta * x) * (delta * (1.0 - chi) - qrp);
}

Supersolution build_supersolution(const SampledKernel& kernel, const Nonlinearity& f,
                                  double lambda, double delta, double N) {
    if (!(lambda > delta && delta > 0))
        throw ConfigError("supersolution needs lambda > delta > 0");
    if (!(N > 0)) throw ConfigError("supersolution needs N > 0");
    auto mol = mollison_check(kernel);
    if (!mol.satisfied)
        throw NumericalError("supersolution needs the Mollison condition at lambda");
    if (!oriented_edge_ok(kernel, Orientation::Leftward, lambda))
        throw NumericalError("kernel MGF unreliable at this lambda; reduce lambda");

    Supersolution w;
    w.lambda = lambda;
    w.delta = delta;
    w.N = N;

    const double x0 = std::exp(-lambda * N);
    const double x1 = 1.0 - std::exp(-delta * N);
    if (!(x0 < 0.5 && 0.5 < x1))
        throw NumericalError("increase N: the tail anchors do not straddle 1/2");

    // kappa0: linear majorants of f near the ends
    double b1 = f.fprime0, b2 = -f.fprime1;
    for (int i = 1; i <= 4000; ++i) {
        double s = x0 * i / 4000.0;
        if (s > 0) b1 = std::max(b1, f(s) / s);
        double u = x1 + (1.0 - x1) * (i - 1) / 4000.0;
        if (u < 1.0) b2 = std::max(b2, f(u) / (1.0 - u));
    }
    double kappa0 = std::max(lambda + b1 / lambda, delta + b2 / delta);
    const double Ml = kernel.mgf(lambda);
    const double Mr = kernel.mgf(-delta); // integral J(z) e^(delta z) dz
    double kappa1 = (Ml - 1.0) / lambda + kappa0;          // left zone, epsilon = 1
    double kappa2 = (1.0 - Mr) / delta + kappa0 - delta;   // right zone, epsilon = 0 is worst

    // multiplicative blends w = e^(lambda x)(1 - psi) and
    // 1 - w = e^(-delta x)(1 - chi) with quintic steps psi, chi. The joint
    // slope below makes the assembled w twice differentiable at 0.
    const double s0 = (lambda * lambda + delta * delta) / (4.0 * (lambda + delta));
    const double qL = N * (lambda - 2.0 * s0);
    const double qR = N * (delta - 2.0 * s0);
    // psi = Q_L((x+N)/N)/2 rises 0 -> 1 with end slope qL and flat curvature;
    // chi = Q_R(1 - x/N)/2 likewise seen from x = N
    w.left_coef = hermite5(0, 1, 0, 0, 0, 1.0, qL, 0);
    w.right_coef = hermite5(0, 1, 0, 0, 0, 1.0, qR, 0);

    // monotonicity and the e^(lambda x) ceiling, on a fine grid
    const int fine = 4000;
    for (int i = 0; i <= fine; ++i) {
        double x = -N + 2.0 * N * i / fine;
        if (w.derivative(x) < -1e-12)
            throw NumericalError("increase N: blended supersolution is not monotone");
        double v = w.value(x);
        if (v > std::exp(lambda * x) + 1e-12 || v > 1.0 + 1e-12)
            throw NumericalError("increase N: blend exceeds the exponential ceiling");
    }

    // kappa3: mid-zone supremum of (|w''| + |J*w - w| + g(w)) / w' with the
    // piecewise majorant g: linear branches near the states, a small smooth
    // connector over the middle values
    const double seam0 = lambda * (kappa0 - lambda) * x0;
    const double seam1 = delta * (kappa0 - delta) * (1.0 - x1);
    auto majorant = [&](double s) {
        if (s <= x0) return lambda * (kappa0 - lambda) * s;
        if (s >= x1) return delta * (kappa0 - delta) * (1.0 - s);
        double t = (s - x0) / (x1 - x0);
        return std::max(f(s), (1 - t) * seam0 + t * seam1);
    };
    auto conv = [&](double x) {
        double s = 0;
        int n = kernel.radius_index();
        double hk = kernel.h();
        for (int j = -n; j <= n; ++j) {
            double wt = (j == -n || j == n) ? 0.5 * hk : hk;
            s += wt * kernel.value_at_offset(j) * w.value(x - j * hk);
        }
        return s;
    };
    auto second = [&](double x) {
        if (x <= -N) return lambda * lambda * std::exp(lambda * x);
        if (x >= N) return -delta * delta * std::exp(-delta * x);
        if (x <= 0) {
            double t = (x + N) / N;
            double psi = 0.5 * poly_eval(w.left_coef, t);
            double psip = 0.5 * poly_deriv(w.left_coef, t) / N;
            double psipp = 0.5 * poly_deriv2(w.left_coef, t) / (N * N);
            return std::exp(lambda * x) *
                   (lambda * lambda * (1 - psi) - 2 * lambda * psip - psipp);
        }
        double u = 1.0 - x / N;
        double chi = 0.5 * poly_eval(w.right_coef, u);
        double vp = 0.5 * poly_deriv(w.right_coef, u) / N;         // (1-chi)'
        double vpp = -0.5 * poly_deriv2(w.right_coef, u) / (N * N); // (1-chi)''
        // w = 1 - e^(-dx) v  =>  w'' = -e^(-dx)(v'' - 2 d v' + d^2 v)
        return -std::exp(-delta * x) *
               (vpp - 2 * delta * vp + delta * delta * (1.0 - chi));
    };

    const double W = kernel.sample_radius();
    const double zone = N + W;
    const int pts = std::min(60000, static_cast<int>(2 * zone / (0.5 * kernel.h())) + 1);
    double kappa3 = 0;
    for (int i = 0; i <= pts; ++i) {
        double x = -zone + 2 * zone * i / pts;
        double wp = w.derivative(x);
        if (wp <= 1e-14) continue; // pure tails carry no constraint here
        double val = (std::abs(second(x)) + std::abs(conv(x) - w.value(x)) +
                      majorant(w.value(x))) / wp;
        kappa3 = std::max(kappa3, val);
    }
    kappa3 += 0.01; // absorbs the grid gap in the supremum

    w.kappa0 = kappa0;
    w.kappa1 = kappa1;
    w.kappa2 = kappa2;
    w.kappa3 = kappa3;
    w.kappa = std::max({kappa0, kappa1, kappa2, kappa3});
    return w;
}

VerifyReport verify_supersolution(const std::function<double(double)>& wf,
                                  const std::function<double(double)>& wprime,
                                  double kappa, const SampledKernel& kernel,
                                  const Nonlinearity& f, double x_lo, double x_hi) {
    const int n = kernel.radius_index();
    const double hk = kernel.h();
    const int pts = std::min(160000, static_cast<int>((x_hi - x_lo) / (0.5 * hk)) + 1);
    VerifyReport rep;
    rep.worst_violation = -1e300;
    for (int i = 0; i <= pts; ++i) {
        double x = x_lo + (x_hi - x_lo) * i / pts;
        double conv = 0;
        for (int j = -n; j <= n; ++j) {
            double wt = (j == -n || j == n) ? 0.5 * hk : hk;
            conv += wt * kernel.value_at_offset(j) * wf(x - j * hk);
        }
        double u = wf(x);
        double defect = conv - u - kappa * wprime(x) + f(std::clamp(u, -0.1, 1.1));
        if (defect > rep.worst_violation) {
            rep.worst_violation = defect;
            rep.location = x;
        }
    }
    rep.ok = rep.worst_violation <= 1e-8;
    return rep;
}

VerifyReport verify_supersolution(const Supersolution& w, double kappa,
                                  const SampledKernel& kernel, const Nonlinearity& f) {
    double reach = w.N + kernel.sample_radius() + 10.0;
    return verify_supersolution([&w](double x) { return w.value(x); },
                                [&w](double x) { return w.derivative(x); }, kappa, kernel, f,
                                -reach, reach);
}

} // namespace frontlab
