#include "frontlab/kernels.hpp"
#include "frontlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace frontlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTailMassCut = 1e-12;

// integral of exp(1/(t^2-1)) over (-1,1), fixed-resolution trapezoid
double bump_norm_integral() {
    static const double value = [] {
        const int n = 1 << 16;
        double s = 0;
        for (int i = 1; i < n; ++i) {
            double t = -1.0 + 2.0 * i / n;
            s += std::exp(1.0 / (t * t - 1.0));
        }
        return s * 2.0 / n;
    }();
    return value;
}

double gaussian_density(double x, double mean, double sigma) {
    double z = (x - mean) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
}

double gaussian_upper_tail(double z) { // P(Z > z), standard normal
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

double uniform_density(double x, double a, double b) {
    const double inv = 1.0 / (b - a);
    if (std::abs(x - a) < 1e-12 || std::abs(x - b) < 1e-12) return 0.5 * inv;
    return (x > a && x < b) ? inv : 0.0;
}

double bump_density(double x, double center, double width) {
    double t = (x - center) / width;
    if (std::abs(t) >= 1.0) return 0.0;
    return std::exp(1.0 / (t * t - 1.0)) / (width * bump_norm_integral());
}

double component_density(const KernelComponent& c, double x) {
    switch (c.tag) {
    case KernelTag::Uniform: return uniform_density(x, c.a, c.b);
    case KernelTag::Bump: return bump_density(x, c.center, c.width);
    case KernelTag::Gaussian: return gaussian_density(x, c.mean, c.sigma);
    default: throw ConfigError("mixture components must be uniform, bump or gaussian");
    }
}

std::pair<double, double> component_support(const KernelComponent& c) {
    switch (c.tag) {
    case KernelTag::Uniform: return {c.a, c.b};
    case KernelTag::Bump: return {c.center - c.width, c.center + c.width};
    case KernelTag::Gaussian: return {-kInf, kInf};
    default: return {-kInf, kInf};
    }
}

double gaussian_trunc_radius(double mean, double sigma, double omitted) {
    // two-sided: P(|X| > T) < omitted. Solve on the wider side.
    double lo = std::abs(mean), hi = std::abs(mean) + 50.0 * sigma;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double m = gaussian_upper_tail((mid - mean) / sigma) +
                   gaussian_upper_tail((mid + mean) / sigma);
        if (m > omitted) lo = mid; else hi = mid;
    }
    return hi;
}

} // namespace

KernelFamily KernelFamily::uniform(double a, double b) {
    KernelFamily f;
    f.tag = KernelTag::Uniform;
    f.a = a;
    f.b = b;
    f.validate();
    return f;
}

KernelFamily KernelFamily::bump(double center, double width) {
    KernelFamily f;
    f.tag = KernelTag::Bump;
    f.center = center;
    f.width = width;
    f.validate();
    return f;
}

KernelFamily KernelFamily::gaussian(double mean, double sigma) {
    KernelFamily f;
    f.tag = KernelTag::Gaussian;
    f.mean = mean;
    f.sigma = sigma;
    f.validate();
    return f;
}

KernelFamily KernelFamily::algebraic_tail(double p) {
    KernelFamily f;
    f.tag = KernelTag::AlgebraicTail;
    f.p = p;
    f.validate();
    return f;
}

KernelFamily KernelFamily::mixture(std::vector<KernelComponent> comps) {
    KernelFamily f;
    f.tag = KernelTag::Mixture;
    f.components = std::move(comps);
    f.validate();
    return f;
}

void KernelFamily::validate() const {
    switch (tag) {
    case KernelTag::Uniform:
        if (!(a < b)) throw ConfigError("uniform kernel requires a < b");
        break;
    case KernelTag::Bump:
        if (!(width > 0)) throw ConfigError("bump kernel requires width > 0");
        break;
    case KernelTag::Gaussian:
        if (!(sigma > 0)) throw ConfigError("gaussian kernel requires sigma > 0");
        break;
    case KernelTag::AlgebraicTail:
        if (p <= 1.0) throw ConfigError("algebraic tail p <= 1 is not normalizable");
        if (p <= 2.0)
            throw ConfigError("algebraic tail p <= 2 has infinite first absolute moment");
        break;
    case KernelTag::Mixture: {
        if (components.empty()) throw ConfigError("mixture kernel needs components");
        double wsum = 0;
        for (const auto& c : components) {
            if (!(c.weight > 0)) throw ConfigError("mixture weights must be positive");
            KernelFamily probe;
            probe.tag = c.tag;
            probe.a = c.a; probe.b = c.b;
            probe.center = c.center; probe.width = c.width;
            probe.mean = c.mean; probe.sigma = c.sigma;
            if (c.tag == KernelTag::Mixture || c.tag == KernelTag::AlgebraicTail)
                throw ConfigError("mixture components must be uniform, bump or gaussian");
            probe.validate();
            wsum += c.weight;
        }
        if (!(wsum > 0)) throw ConfigError("mixture weights sum to zero");
        break;
    }
    }
}

KernelFamily KernelFamily::reflected() const {
    KernelFamily f = *this;
    switch (tag) {
    case KernelTag::Uniform: f.a = -b; f.b = -a; break;
    case KernelTag::Bump: f.center = -center; break;
    case KernelTag::Gaussian: f.mean = -mean; break;
    case KernelTag::AlgebraicTail: break; // symmetric
    case KernelTag::Mixture:
        for (auto& c : f.components) {
            switch (c.tag) {
            case KernelTag::Uniform: { double na = -c.b, nb = -c.a; c.a = na; c.b = nb; break; }
            case KernelTag::Bump: c.center = -c.center; break;
            case KernelTag::Gaussian: c.mean = -c.mean; break;
            default: break;
            }
        }
        break;
    }
    return f;
}

double KernelFamily::density(double x) const {
    switch (tag) {
    case KernelTag::Uniform: return uniform_density(x, a, b);
    case KernelTag::Bump: return bump_density(x, center, width);
    case KernelTag::Gaussian: return gaussian_density(x, mean, sigma);
    case KernelTag::AlgebraicTail:
        return 0.5 * (p - 1.0) * std::pow(1.0 + std::abs(x), -p);
    case KernelTag::Mixture: {
        double wsum = 0, d = 0;
        for (const auto& c : components) {
            wsum += c.weight;
            d += c.weight * component_density(c, x);
        }
        return d / wsum;
    }
    }
    return 0;
}

bool KernelFamily::compact_support() const {
    switch (tag) {
    case KernelTag::Uniform:
    case KernelTag::Bump: return true;
    case KernelTag::Gaussian:
    case KernelTag::AlgebraicTail: return false;
    case KernelTag::Mixture:
        return std::all_of(components.begin(), components.end(), [](const KernelComponent& c) {
            return c.tag != KernelTag::Gaussian;
        });
    }
    return false;
}

std::pair<double, double> KernelFamily::support() const {
    switch (tag) {
    case KernelTag::Uniform: return {a, b};
    case KernelTag::Bump: return {center - width, center + width};
    case KernelTag::Gaussian:
    case KernelTag::AlgebraicTail: return {-kInf, kInf};
    case KernelTag::Mixture: {
        double lo = kInf, hi = -kInf;
        for (const auto& c : components) {
            auto s = component_support(c);
            lo = std::min(lo, s.first);
            hi = std::max(hi, s.second);
        }
        return {lo, hi};
    }
    }
    return {0, 0};
}

double KernelFamily::truncation_radius(double omitted) const {
    switch (tag) {
    case KernelTag::Uniform: return std::max(std::abs(a), std::abs(b));
    case KernelTag::Bump: return std::max(std::abs(center - width), std::abs(center + width));
    case KernelTag::Gaussian: return gaussian_trunc_radius(mean, sigma, omitted);
    case KernelTag::AlgebraicTail:
        // two-sided tail mass beyond T is (1+T)^(1-p)
        return std::pow(omitted, -1.0 / (p - 1.0)) - 1.0;
    case KernelTag::Mixture: {
        double r = 0;
        for (const auto& c : components) {
            if (c.tag == KernelTag::Gaussian)
                r = std::max(r, gaussian_trunc_radius(c.mean, c.sigma, omitted));
            else {
                auto s = component_support(c);
                r = std::max({r, std::abs(s.first), std::abs(s.second)});
            }
        }
        return r;
    }
    }
    return 0;
}

bool KernelFamily::mollison() const {
    return tag != KernelTag::AlgebraicTail; // all shipped tails except algebraic
}

bool KernelFamily::c1_smooth() const {
    switch (tag) {
    case KernelTag::Uniform: return false;          // jumps at the endpoints
    case KernelTag::AlgebraicTail: return false;    // |x| kink at the origin
    case KernelTag::Bump:
    case KernelTag::Gaussian: return true;
    case KernelTag::Mixture:
        return std::all_of(components.begin(), components.end(), [](const KernelComponent& c) {
            return c.tag != KernelTag::Uniform;
        });
    }
    return false;
}

bool KernelFamily::has_analytic_mgf() const {
    switch (tag) {
    case KernelTag::Uniform:
    case KernelTag::Gaussian: return true;
    case KernelTag::Mixture:
        return std::all_of(components.begin(), components.end(), [](const KernelComponent& c) {
            return c.tag == KernelTag::Uniform || c.tag == KernelTag::Gaussian;
        });
    default: return false;
    }
}

double KernelFamily::analytic_mgf(double lambda) const {
    // M(lambda) = integral J(u) e^(-lambda u) du
    auto uniform_part = [](double lam, double lo, double hi) {
        if (std::abs(lam) < 1e-12) {
            // expand to second order for stability near 0
            double m = 0.5 * (lo + hi);
            return 1.0 - lam * m + lam * lam * (hi * hi + hi * lo + lo * lo) / 6.0;
        }
        return (std::exp(-lam * lo) - std::exp(-lam * hi)) / (lam * (hi - lo));
    };
    switch (tag) {
    case KernelTag::Uniform: return uniform_part(lambda, a, b);
    case KernelTag::Gaussian: return std::exp(-lambda * mean + 0.5 * lambda * lambda * sigma * sigma);
    case KernelTag::Mixture: {
        double wsum = 0, s = 0;
        for (const auto& c : components) {
            wsum += c.weight;
            if (c.tag == KernelTag::Uniform) s += c.weight * uniform_part(lambda, c.a, c.b);
            else if (c.tag == KernelTag::Gaussian)
                s += c.weight * std::exp(-lambda * c.mean + 0.5 * lambda * lambda * c.sigma * c.sigma);
            else throw NumericalError("no closed-form mgf for this mixture");
        }
        return s / wsum;
    }
    default: throw NumericalError("no closed-form mgf for this kernel family");
    }
}

// ---------------------------------------------------------------------------

void SampledKernel::finalize(bool renormalize) {
    for (double v : values_)
        if (!(v >= 0)) throw InvariantError("kernel samples must be nonnegative");
    const std::size_t m = values_.size();
    prefix_.assign(m, 0.0);
    for (std::size_t i = 1; i < m; ++i)
        prefix_[i] = prefix_[i - 1] + 0.5 * h_ * (values_[i - 1] + values_[i]);
    double mass = prefix_.back();
    if (!(mass > 0)) throw InvariantError("kernel has zero mass on the sampled range");
    if (renormalize) {
        for (auto& v : values_) v /= mass;
        for (auto& v : prefix_) v /= mass;
    }

    KernelMoments mom;
    mom.mass = prefix_.back();
    double mean = 0, nu = 0, x2 = 0;
    for (int i = -n_; i <= n_; ++i) {
        double w = (i == -n_ || i == n_) ? 0.5 * h_ : h_;
        double x = i * h_;
        double J = values_[static_cast<std::size_t>(i + n_)];
        mean += w * x * J;
        nu += w * std::abs(x) * J;
        x2 += w * x * x * J;
    }
    mom.mean = mean;
    mom.nu = nu;
    mom.alpha = 0.5 * x2;
    mom.beta = -mean;
    moments_ = mom;

    if (!(mom.alpha > 0)) throw InvariantError("kernel is a point mass (alpha == 0)");
    if (std::abs(mom.mass - 1.0) > 1e-10)
        throw InvariantError("kernel mass deviates from 1 after normalization");
}

double SampledKernel::max_value() const {
    return *std::max_element(values_.begin(), values_.end());
}

double SampledKernel::prefix_mass(int k) const {
    if (k < -n_) return 0.0;
    if (k >= n_) return prefix_.back();
    return prefix_[static_cast<std::size_t>(k + n_)];
}

bool SampledKernel::c1_smooth() const {
    return family_ ? family_->c1_smooth() : false;
}

double SampledKernel::mgf(double lambda) const {
    double worst = std::abs(lambda) * (n_ * h_);
    if (worst > 700.0)
        throw NumericalError("mgf: lambda out of evaluable range (exponent overflow)");
    double s = 0;
    for (int i = -n_; i <= n_; ++i) {
        double w = (i == -n_ || i == n_) ? 0.5 * h_ : h_;
        s += w * values_[static_cast<std::size_t>(i + n_)] * std::exp(-lambda * (i * h_));
    }
    return s;
}

bool SampledKernel::mgf_edge_ok(double lambda) const {
    if (!truncated()) return true;
    double m = mgf(lambda);
    // the edge that carries the exponential weight
    double wl = 0.5 * h_ * values_.front() * std::exp(lambda * (n_ * h_));
    double wr = 0.5 * h_ * values_.back() * std::exp(-lambda * (n_ * h_));
    return std::max(wl, wr) <= 1e-6 * m;
}

double SampledKernel::max_reliable_lambda() const {
    if (!truncated()) return 50.0;
    // edge weight grows with lambda; scan then bisect the transition
    double last_ok = 0.0, first_bad = -1.0;
    for (int i = 1; i <= 256; ++i) {
        double lam = 50.0 * i / 256.0;
        bool ok = false;
        try {
            ok = mgf_edge_ok(lam);
        } catch (const NumericalError&) {
            ok = false;
        }
        if (ok) last_ok = lam;
        else { first_bad = lam; break; }
    }
    if (first_bad < 0) return 50.0;
    if (last_ok == 0.0) return 0.0;
    double lo = last_ok, hi = first_bad;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        bool ok = false;
        try {
            ok = mgf_edge_ok(mid);
        } catch (const NumericalError&) {
            ok = false;
        }
        if (ok) lo = mid; else hi = mid;
    }
    return lo;
}

void SampledKernel::dump_csv(const std::string& path) const {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw NumericalError("cannot open " + path + " for writing");
    std::fprintf(fp, "x,J\n");
    for (int i = -n_; i <= n_; ++i)
        std::fprintf(fp, "%.17g,%.17g\n", i * h_, values_[static_cast<std::size_t>(i + n_)]);
    std::fclose(fp);
}

SampledKernel build_kernel(const KernelFamily& family, double h, double min_radius,
                           double max_radius) {
    if (!(h > 0)) throw ConfigError("kernel grid spacing h must be positive");
    family.validate();

    double target;
    double omitted = 0;
    if (family.compact_support()) {
        target = family.truncation_radius(kTailMassCut);
        target = std::max(target, min_radius);
    } else {
        double full = family.truncation_radius(kTailMassCut);
        double cap = std::max(max_radius, min_radius);
        target = std::min(full, cap);
    }
    // one cell beyond the declared edge so that density jumps sitting on a
    // node keep their two-sided trapezoid cells (the half-sample errors cancel)
    int n = static_cast<int>(std::ceil(target / h - 1e-9)) + 1;
    n = std::max(n, 2);

    SampledKernel k;
    k.h_ = h;
    k.n_ = n;
    k.values_.resize(static_cast<std::size_t>(2 * n + 1));
    for (int i = -n; i <= n; ++i)
        k.values_[static_cast<std::size_t>(i + n)] = family.density(i * h);
    k.family_ = family;
    k.support_ = family.support();
    k.truncation_radius_ = family.truncation_radius(kTailMassCut);
    if (!family.compact_support()) {
        // analytic mass outside the sampled range, before renormalization
        double T = n * h;
        switch (family.tag) {
        case KernelTag::Gaussian:
            omitted = gaussian_upper_tail((T - family.mean) / family.sigma) +
                      gaussian_upper_tail((T + family.mean) / family.sigma);
            break;
        case KernelTag::AlgebraicTail:
            omitted = std::pow(1.0 + T, 1.0 - family.p);
            break;
        case KernelTag::Mixture: {
            double wsum = 0;
            for (const auto& c : family.components) wsum += c.weight;
            for (const auto& c : family.components)
                if (c.tag == KernelTag::Gaussian)
                    omitted += c.weight / wsum *
                               (gaussian_upper_tail((T - c.mean) / c.sigma) +
                                gaussian_upper_tail((T + c.mean) / c.sigma));
            break;
        }
        default: break;
        }
    }
    k.omitted_mass_ = omitted;
    k.finalize();
    return k;
}

SampledKernel kernel_from_samples(double h, std::vector<double> values,
                                  std::optional<KernelFamily> family) {
    if (!(h > 0)) throw ConfigError("kernel grid spacing h must be positive");
    if (values.size() < 5 || values.size() % 2 == 0)
        throw ConfigError("kernel samples must have odd size >= 5");
    SampledKernel k;
    k.h_ = h;
    k.n_ = static_cast<int>((values.size() - 1) / 2);
    k.values_ = std::move(values);
    k.family_ = std::move(family);
    k.support_ = {-k.n_ * h, k.n_ * h};
    k.truncation_radius_ = k.n_ * h;
    k.omitted_mass_ = 0;
    k.finalize();
    return k;
}

SampledKernel reflect(const SampledKernel& k) {
    SampledKernel r;
    r.h_ = k.h_;
    r.n_ = k.n_;
    r.values_.assign(k.values_.rbegin(), k.values_.rend());
    if (k.family_) r.family_ = k.family_->reflected();
    r.support_ = {-k.support_.second, -k.support_.first};
    r.truncation_radius_ = k.truncation_radius_;
    r.omitted_mass_ = k.omitted_mass_;
    r.finalize(false); // samples already normalized; an exact flip stays exact
    return r;
}

MollisonReport mollison_check(const SampledKernel& k) {
    MollisonReport rep;
    if (k.family()) {
        if (k.family()->mollison()) {
            rep.satisfied = true;
            rep.witness_lambda = 1.0;
            rep.diagnosis = k.family()->compact_support()
                                ? "compact support: finite for every lambda > 0"
                                : "tail decays faster than every exponential";
        } else {
            rep.satisfied = false;
            rep.witness_lambda = 0.0;
            rep.diagnosis =
                "algebraic tail: e^(lambda z) (1+|z|)^-p diverges for every lambda > 0";
        }
        return rep;
    }
    rep.satisfied = true;
    rep.witness_lambda = 1.0;
    rep.diagnosis = "sampled kernel treated as compactly supported";
    return rep;
}

SampledKernel project_direction(const DirectionalDensity& density,
                                const std::array<double, 3>& e, double h) {
    if (density.dim < 1 || density.dim > 3)
        throw ConfigError("project_direction supports dimensions 1..3");
    const int N = density.dim;
    double en = 0;
    for (int i = 0; i < N; ++i) en += e[i] * e[i];
    if (std::abs(std::sqrt(en) - 1.0) > 1e-10)
        throw ConfigError("direction vector must have unit norm");
    for (int i = 0; i < N; ++i)
        if (!(density.sigma[i] > 0)) throw ConfigError("density sigmas must be positive");

    auto dens = [&](const std::array<double, 3>& y) {
        double d = 1.0;
        for (int i = 0; i < N; ++i) d *= gaussian_density(y[i], density.mean[i], density.sigma[i]);
        return d;
    };

    double sigma_max = 0, mean_norm = 0;
    for (int i = 0; i < N; ++i) {
        sigma_max = std::max(sigma_max, density.sigma[i]);
        mean_norm += density.mean[i] * density.mean[i];
    }
    mean_norm = std::sqrt(mean_norm);
    const double reach = mean_norm + 8.0 * sigma_max;

    // orthonormal complement of e by Gram-Schmidt over the coordinate axes
    std::vector<std::array<double, 3>> basis;
    for (int axis = 0; axis < N && static_cast<int>(basis.size()) < N - 1; ++axis) {
        std::array<double, 3> v{0, 0, 0};
        v[axis] = 1.0;
        double pe = 0;
        for (int i = 0; i < N; ++i) pe += v[i] * e[i];
        for (int i = 0; i < N; ++i) v[i] -= pe * e[i];
        for (const auto& u : basis) {
            double pu = 0;
            for (int i = 0; i < N; ++i) pu += v[i] * u[i];
            for (int i = 0; i < N; ++i) v[i] -= pu * u[i];
        }
        double norm = 0;
        for (int i = 0; i < N; ++i) norm += v[i] * v[i];
        norm = std::sqrt(norm);
        if (norm > 1e-8) {
            for (int i = 0; i < N; ++i) v[i] /= norm;
            basis.push_back(v);
        }
    }

    const int ns = static_cast<int>(std::ceil(reach / h));
    const int nt = (N == 3) ? 181 : 2001; // per transverse axis
    std::vector<double> samples(static_cast<std::size_t>(2 * ns + 1), 0.0);

    for (int is = -ns; is <= ns; ++is) {
        double s = is * h;
        double acc = 0;
        if (N == 1) {
            acc = dens({s, 0, 0});
        } else if (N == 2) {
            const auto& v = basis[0];
            double tc = density.mean[0] * v[0] + density.mean[1] * v[1];
            double t0 = tc - reach, t1 = tc + reach, dt = (t1 - t0) / nt;
            for (int j = 0; j <= nt; ++j) {
                double t = t0 + j * dt;
                double w = (j == 0 || j == nt) ? 0.5 : 1.0;
                acc += w * dens({s * e[0] + t * v[0], s * e[1] + t * v[1], 0});
            }
            acc *= dt;
        } else {
            const auto& v1 = basis[0];
            const auto& v2 = basis[1];
            double tc1 = 0, tc2 = 0;
            for (int i = 0; i < 3; ++i) {
                tc1 += density.mean[i] * v1[i];
                tc2 += density.mean[i] * v2[i];
            }
            double dt1 = 2 * reach / nt, dt2 = 2 * reach / nt;
            for (int j = 0; j <= nt; ++j) {
                double t1v = tc1 - reach + j * dt1;
                double w1 = (j == 0 || j == nt) ? 0.5 : 1.0;
                for (int k2 = 0; k2 <= nt; ++k2) {
                    double t2v = tc2 - reach + k2 * dt2;
                    double w2 = (k2 == 0 || k2 == nt) ? 0.5 : 1.0;
                    std::array<double, 3> y;
                    for (int i = 0; i < 3; ++i) y[i] = s * e[i] + t1v * v1[i] + t2v * v2[i];
                    acc += w1 * w2 * dens(y);
                }
            }
            acc *= dt1 * dt2;
        }
        samples[static_cast<std::size_t>(is + ns)] = acc;
    }
    return kernel_from_samples(h, std::move(samples));
}

} // namespace frontlab
