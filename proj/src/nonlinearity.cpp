#include "frontlab/nonlinearity.hpp"
#include "frontlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace frontlab {

namespace {

double bump(double t) {
    return (std::abs(t) < 1.0) ? std::exp(1.0 / (t * t - 1.0)) : 0.0;
}

struct BumpCdfTable {
    std::vector<double> cdf;
    double norm;
    BumpCdfTable() {
        const int n = 1 << 14;
        cdf.assign(n + 1, 0.0);
        for (int i = 1; i <= n; ++i) {
            double t0 = -1.0 + 2.0 * (i - 1) / n;
            double t1 = -1.0 + 2.0 * i / n;
            cdf[i] = cdf[i - 1] + 0.5 * (bump(t0) + bump(t1)) * (t1 - t0);
        }
        norm = cdf.back();
    }
    double eval(double t) const { // integral of bump over (-1, t], normalized
        if (t <= -1.0) return 0.0;
        if (t >= 1.0) return 1.0;
        double x = (t + 1.0) / 2.0 * (cdf.size() - 1);
        int i = std::min(static_cast<int>(x), static_cast<int>(cdf.size()) - 2);
        double fr = x - i;
        return ((1 - fr) * cdf[i] + fr * cdf[i + 1]) / norm;
    }
};

const BumpCdfTable& bump_cdf() {
    static const BumpCdfTable table;
    return table;
}

// Fritsch-Carlson monotone cubic interpolant
struct MonotoneSpline {
    std::vector<double> x, y, m;
    MonotoneSpline(std::vector<double> xs, std::vector<double> ys,
                   std::optional<double> slope0 = std::nullopt,
                   std::optional<double> slope1 = std::nullopt)
        : x(std::move(xs)), y(std::move(ys)) {
        const std::size_t n = x.size();
        std::vector<double> d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (!(x[i + 1] > x[i])) throw ConfigError("spline abscissae must increase");
            d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        }
        m.assign(n, 0.0);
        m[0] = slope0.value_or(d[0]);
        m[n - 1] = slope1.value_or(d[n - 2]);
        for (std::size_t i = 1; i + 1 < n; ++i)
            m[i] = (d[i - 1] * d[i] <= 0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (d[i] == 0) { m[i] = m[i + 1] = 0; continue; }
            double a = m[i] / d[i], b = m[i + 1] / d[i];
            double s = a * a + b * b;
            if (s > 9.0) {
                double tau = 3.0 / std::sqrt(s);
                m[i] = tau * a * d[i];
                m[i + 1] = tau * b * d[i];
            }
        }
    }
    std::size_t segment(double t) const {
        std::size_t lo = 0, hi = x.size() - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (x[mid] <= t) lo = mid; else hi = mid;
        }
        return lo;
    }
    double value(double t) const {
        if (t <= x.front()) return y.front() + m.front() * (t - x.front());
        if (t >= x.back()) return y.back() + m.back() * (t - x.back());
        std::size_t i = segment(t);
        double hseg = x[i + 1] - x[i], s = (t - x[i]) / hseg;
        double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
        double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
        return h00 * y[i] + h10 * hseg * m[i] + h01 * y[i + 1] + h11 * hseg * m[i + 1];
    }
    double derivative(double t) const {
        if (t <= x.front()) return m.front();
        if (t >= x.back()) return m.back();
        std::size_t i = segment(t);
        double hseg = x[i + 1] - x[i], s = (t - x[i]) / hseg;
        double d00 = 6 * s * (s - 1) / hseg, d10 = (3 * s - 1) * (s - 1);
        double d01 = -d00, d11 = s * (3 * s - 2);
        return d00 * y[i] + d10 * m[i] + d01 * y[i + 1] + d11 * m[i + 1];
    }
};

} // namespace

double Nonlinearity::lipschitz() const {
    double lip = 0;
    for (int i = 0; i <= 2000; ++i) lip = std::max(lip, std::abs(fp(i / 2000.0)));
    return lip;
}

Nonlinearity make_logistic(double r) {
    if (!(r > 0)) throw ConfigError("logistic rate must be positive");
    Nonlinearity n;
    n.f = [r](double u) { return r * u * (1.0 - u); };
    n.fp = [r](double u) { return r * (1.0 - 2.0 * u); };
    n.fprime0 = r;
    n.fprime1 = -r;
    n.family = "logistic";
    n.holder.gamma = 1.0;
    n.holder.m = 1.0;
    n.holder.A = std::abs(1.0 - r) > 1e-12 ? std::abs(1.0 - r) : 1.0;
    n.holder.delta = 0.1;
    return n;
}

Nonlinearity make_cubic(double r, double a) {
    if (!(r > 0)) throw ConfigError("cubic rate must be positive");
    Nonlinearity n;
    n.f = [r, a](double u) { return r * u * (1.0 - u) * (1.0 + a * u); };
    n.fp = [r, a](double u) { return r * (1.0 + 2.0 * (a - 1.0) * u - 3.0 * a * u * u); };
    n.fprime0 = r;
    n.fprime1 = -r * (1.0 + a);
    n.family = "cubic";
    return n;
}

Nonlinearity make_ignition(double rho, double amp) {
    if (!(rho > 0 && rho < 1)) throw ConfigError("ignition threshold must lie in (0,1)");
    if (!(amp > 0)) throw ConfigError("ignition amplitude must be positive");
    Nonlinearity n;
    n.f = [rho, amp](double u) {
        if (u <= rho) return 0.0;
        if (u >= 1.0) return amp * (u - rho) * (u - rho) * (1.0 - u);
        return amp * (u - rho) * (u - rho) * (1.0 - u);
    };
    n.fp = [rho, amp](double u) {
        if (u <= rho) return 0.0;
        return amp * ((u - rho) * (2.0 * (1.0 - u) - (u - rho)));
    };
    n.fprime0 = 0.0;
    n.fprime1 = -amp * (1.0 - rho) * (1.0 - rho);
    n.family = "ignition";
    return n;
}

Nonlinearity make_spline(const std::vector<double>& u, const std::vector<double>& v,
                         std::optional<double> slope0, std::optional<double> slope1) {
    if (u.size() != v.size() || u.size() < 3)
        throw ConfigError("spline needs matching u,f lists with at least 3 points");
    if (std::abs(u.front()) > 1e-12 || std::abs(u.back() - 1.0) > 1e-12 ||
        std::abs(v.front()) > 1e-12 || std::abs(v.back()) > 1e-12)
        throw ConfigError("spline must run from (0,0) to (1,0)");
    auto sp = std::make_shared<MonotoneSpline>(u, v, slope0, slope1);
    Nonlinearity n;
    n.f = [sp](double x) { return sp->value(x); };
    n.fp = [sp](double x) { return sp->derivative(x); };
    n.fprime0 = sp->derivative(0.0);
    n.fprime1 = sp->derivative(1.0);
    n.family = "spline";
    return n;
}

CutoffFamily::CutoffFamily(double theta_) : theta(theta_) {
    if (!(theta > 0 && theta < 0.5)) throw ConfigError("cutoff theta must lie in (0, 1/2)");
}

double CutoffFamily::base(double s) {
    // integral of the bump translated to [1,2]
    return bump_cdf().eval(2.0 * s - 3.0);
}

double CutoffFamily::base_prime(double s) {
    return 2.0 * bump(2.0 * s - 3.0) / bump_cdf().norm;
}

double CutoffFamily::eta(double s) const { return base(s / theta); }
double CutoffFamily::eta_prime(double s) const { return base_prime(s / theta) / theta; }

Classification classify(const Nonlinearity& f, int samples) {
    if (std::abs(f(0.0)) > 1e-12 || std::abs(f(1.0)) > 1e-12)
        throw InvariantError("nonlinearity must satisfy f(0) = f(1) = 0 within 1e-12");
    const double tol = 1e-10;
    Classification c;

    // monostable: f'(1) < 0, f > 0 inside, f <= 0 outside [0,1]
    bool interior_pos = true;
    double worst_mono = 0, worst_mono_u = 0;
    for (int i = 1; i < samples; ++i) {
        double u = static_cast<double>(i) / samples;
        double v = f(u);
        if (v <= tol && tol - v > worst_mono) {
            worst_mono = tol - v;
            worst_mono_u = u;
            interior_pos = false;
        }
    }
    bool outside_ok = true;
    for (int i = 0; i <= 100; ++i) {
        double u = -0.1 + 0.1 * i / 100.0;
        if (f(u) > tol) { outside_ok = false; worst_mono_u = u; }
        double w = 1.0 + 0.1 * i / 100.0;
        if (f(w) > tol) { outside_ok = false; worst_mono_u = w; }
    }
    c.monostable = (f.fprime1 < 0) && interior_pos && outside_ok;
    c.worst_monostable = {worst_mono_u, worst_mono};

    // KPP: monostable and f(s) <= f'(0) s
    if (c.monostable) {
        double worst = 0, worst_u = 0;
        for (int i = 1; i < samples; ++i) {
            double u = static_cast<double>(i) / samples;
            double excess = f(u) - f.fprime0 * u;
            if (excess > worst) { worst = excess; worst_u = u; }
        }
        c.kpp = worst <= tol;
        c.worst_kpp = {worst_u, worst};
    }

    // ignition: f == 0 on [0, rho], f > 0 on (rho, 1)
    {
        int i = 1;
        for (; i < samples; ++i) {
            double u = static_cast<double>(i) / samples;
            if (std::abs(f(u)) > tol) break;
        }
        double rho = static_cast<double>(i - 1) / samples;
        if (i > 1 && i < samples) {
            bool pos_beyond = true;
            double worst = 0, worst_u = 0;
            for (int j = i; j < samples; ++j) {
                double u = static_cast<double>(j) / samples;
                double v = f(u);
                if (v <= tol && u < 1.0 - 0.5 / samples) {
                    // allow the approach to f(1) = 0 at the last sample
                    if (tol - v > worst) { worst = tol - v; worst_u = u; }
                    pos_beyond = false;
                }
            }
            c.ignition = pos_beyond && f.fprime1 < 0;
            c.rho = rho;
            c.worst_ignition = {worst_u, worst};
        }
    }
    return c;
}

Nonlinearity ignition_approx(const Nonlinearity& f, double theta) {
    Classification c = classify(f);
    if (!c.monostable) throw ConfigError("ignition_approx requires a monostable nonlinearity");
    if (!(theta > 0 && theta < 0.25)) throw ConfigError("ignition_approx needs 0 < theta < 1/4");
    CutoffFamily cut(theta);
    auto base_f = f.f;
    auto base_fp = f.fp;
    Nonlinearity n;
    n.f = [base_f, cut](double u) { return base_f(u) * cut.eta(u); };
    n.fp = [base_f, base_fp, cut](double u) {
        return base_fp(u) * cut.eta(u) + base_f(u) * cut.eta_prime(u);
    };
    n.fprime0 = 0.0;
    n.fprime1 = f.fprime1;
    n.holder = f.holder;
    n.family = f.family + "*eta";
    return n;
}

GAnalysis g_analysis(const Nonlinearity& f) {
    auto gp = [&](double u) { return 1.0 - f.fp(u); };
    auto g = [&](double u) { return u - f(u); };

    const int N = 10000;
    std::vector<double> crossings;
    double prev = gp(0.0);
    for (int i = 1; i <= N; ++i) {
        double u = static_cast<double>(i) / N;
        double cur = gp(u);
        if ((prev < 0) != (cur < 0) && (prev != 0 || cur != 0)) {
            double lo = static_cast<double>(i - 1) / N, hi = u;
            double flo = prev;
            for (int it = 0; it < 80; ++it) { // bisection to well below 1e-10
                double mid = 0.5 * (lo + hi), fm = gp(mid);
                if ((flo < 0) == (fm < 0)) { lo = mid; flo = fm; } else hi = mid;
            }
            crossings.push_back(0.5 * (lo + hi));
        }
        prev = cur;
    }

    GAnalysis res;
    if (crossings.empty()) {
        bool nondecreasing = true;
        for (int i = 0; i <= N; ++i)
            if (gp(static_cast<double>(i) / N) < -1e-10) nondecreasing = false;
        if (!nondecreasing)
            throw NumericalError("g is decreasing without sign changes of g' in [0,1]");
        res.monotone = true;
        return res;
    }
    if (crossings.size() != 2)
        throw NumericalError("g has more than one non-monotone interval; not supported");

    double ah = crossings[0], bh = crossings[1];
    if (!(gp(0.5 * ah) > 0 && gp(0.5 * (ah + bh)) < 0 && gp(0.5 * (bh + 1.0)) > 0))
        throw NumericalError("g' sign pattern is not increasing/decreasing/increasing");

    res.alpha_hat = ah;
    res.beta_hat = bh;
    // largest level-matched pair strictly inside the monotone flanks
    double level = g(ah) - 1e-3 * (g(ah) - g(bh));
    if (!(level > g(0.0) && level > g(bh)))
        throw NumericalError("plateau level collides with the flank range");
    auto solve_level = [&](double lo, double hi) {
        double flo = g(lo) - level;
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo + hi), fm = g(mid) - level;
            if ((flo < 0) == (fm < 0)) { lo = mid; flo = fm; } else hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    res.a = solve_level(0.0, ah);
    res.b = solve_level(bh, 1.0);
    res.level = level;
    res.has_plateau = true;
    return res;
}

} // namespace frontlab
