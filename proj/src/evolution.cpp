#include "frontlab/evolution.hpp"
#include "frontlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace frontlab {

namespace {

// iterative radix-2 complex FFT, in place
void fft(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = 2 * M_PI / static_cast<double>(len) * (inverse ? 1 : -1);
        std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                auto u = a[i + k];
                auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse)
        for (auto& z : a) z /= static_cast<double>(n);
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace

Stepper::Stepper(SampledKernel kernel, Nonlinearity f)
    : kernel_(std::move(kernel)), f_(std::move(f)) {
    lip_ = f_.lipschitz();
    use_fft_ = kernel_.radius_index() > 400;
}

void Stepper::convolve(const SimState& state, const std::vector<double>& U,
                       std::vector<double>& out) const {
    const int n = state.nodes() - 1;
    const int m = kernel_.radius_index();
    const double h = state.h;
    if (std::abs(h - kernel_.h()) > 1e-12)
        throw ConfigError("kernel sampling must match the simulation grid");

    scratch_.assign(U.begin(), U.end());
    scratch_.front() *= 0.5;
    scratch_.back() *= 0.5;

    if (!use_fft_) {
        for (int i = 0; i <= n; ++i) {
            int jlo = std::max(0, i - m), jhi = std::min(n, i + m);
            double s = 0;
            for (int j = jlo; j <= jhi; ++j)
                s += kernel_.value_at_offset(i - j) * scratch_[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i)] = s * h;
        }
    } else {
        const std::size_t P = next_pow2(static_cast<std::size_t>(n + 1 + 2 * m + 1));
        if (planned_nodes_ != n + 1 || kernel_hat_.size() != P) {
            kernel_hat_.assign(P, {0, 0});
            for (int d = -m; d <= m; ++d)
                kernel_hat_[static_cast<std::size_t>(d + m)] = kernel_.value_at_offset(d);
            fft(kernel_hat_, false);
            planned_nodes_ = n + 1;
        }
        buf_.assign(P, {0, 0});
        for (int j = 0; j <= n; ++j) buf_[static_cast<std::size_t>(j)] = scratch_[static_cast<std::size_t>(j)];
        fft(buf_, false);
        for (std::size_t i = 0; i < P; ++i) buf_[i] *= kernel_hat_[i];
        fft(buf_, true);
        for (int i = 0; i <= n; ++i)
            out[static_cast<std::size_t>(i)] = h * buf_[static_cast<std::size_t>(i + m)].real();
    }
    // constant exterior states fold in as kernel tail masses
    for (int i = 0; i <= n; ++i) {
        double left_mass = kernel_.upper_tail_from(i);
        double right_mass = kernel_.prefix_mass(i - n);
        out[static_cast<std::size_t>(i)] +=
            state.ext_left * left_mass + state.ext_right * right_mass;
    }
}

void Stepper::rhs(const SimState& state, const std::vector<double>& U,
                  std::vector<double>& out) const {
    convolve(state, U, out);
    for (std::size_t i = 0; i < U.size(); ++i) out[i] += -U[i] + f_(U[i]);
}

void Stepper::step(SimState& state, double dt) const {
    const std::size_t n = state.U.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    rhs(state, state.U, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state.U[i] + 0.5 * dt * k1[i];
    rhs(state, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state.U[i] + 0.5 * dt * k2[i];
    rhs(state, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state.U[i] + dt * k3[i];
    rhs(state, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
        state.U[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    state.t += dt;
    for (double v : state.U)
        if (v < -1e-9 || v > 1.0 + 1e-9)
            throw InvariantError("field left [0,1]: the step is unstable (reduce dt)");
}

void track_front(FrontTrack& track, const SimState& state) {
    const int n = state.nodes();
    for (int i = 0; i + 1 < n; ++i) {
        double a = state.U[static_cast<std::size_t>(i)];
        double b = state.U[static_cast<std::size_t>(i + 1)];
        if (a <= track.level && b > track.level) {
            double fr = (track.level - a) / (b - a);
            track.times.push_back(state.t);
            track.positions.push_back(state.x(i) + fr * state.h);
            return;
        }
    }
    throw NumericalError("front left the window: recenter before tracking");
}

SpeedFit measure_speed(const FrontTrack& track, double t_begin, double t_end) {
    SpeedFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < track.times.size(); ++i) {
        double t = track.times[i];
        if (t < t_begin || t > t_end) continue;
        double p = track.positions[i];
        sx += t; sy += p; sxx += t * t; sxy += t * p;
        ++n;
    }
    if (n < 20) throw NumericalError("measure_speed: fewer than 20 samples in the window");
    double dn = n;
    fit.speed = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    double icept = (sy - fit.speed * sx) / dn;
    double ss = 0;
    for (std::size_t i = 0; i < track.times.size(); ++i) {
        double t = track.times[i];
        if (t < t_begin || t > t_end) continue;
        double e = track.positions[i] - (fit.speed * t + icept);
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / dn);
    fit.samples = n;
    return fit;
}

AccelReport accelerating_detector(const FrontTrack& track) {
    if (track.times.size() < 40)
        throw NumericalError("accelerating_detector needs at least 40 samples");
    double t_end = track.times.back();
    double T = 0.5 * t_end;
    AccelReport rep;
    rep.early = measure_speed(track, 0.5 * T, T);
    rep.late = measure_speed(track, T, 2.0 * T);
    double vem = std::abs(rep.early.speed), vlm = std::abs(rep.late.speed);
    rep.speed_ratio = vem > 0 ? vlm / vem : 0.0;
    auto clean = [](const SpeedFit& f, double span) {
        // tolerate genuine curvature: compare against the window displacement
        return f.residual <= 0.15 * (std::abs(f.speed) * span + 1.0);
    };
    rep.accelerating =
        rep.speed_ratio >= 1.10 && clean(rep.early, 0.5 * T) && clean(rep.late, T);
    return rep;
}

TestFunction TestFunction::gaussian_bump() {
    TestFunction t;
    t.value = [](double x) { return std::exp(-0.5 * x * x); };
    t.d1 = [](double x) { return -x * std::exp(-0.5 * x * x); };
    t.d2 = [](double x) { return (x * x - 1.0) * std::exp(-0.5 * x * x); };
    return t;
}

TestFunction TestFunction::tanh_profile() {
    TestFunction t;
    t.value = [](double x) { return 0.5 * (1.0 + std::tanh(0.5 * x)); };
    t.d1 = [](double x) { double s = 1.0 / std::cosh(0.5 * x); return 0.25 * s * s; };
    t.d2 = [](double x) {
        double s = 1.0 / std::cosh(0.5 * x);
        return -0.25 * s * s * std::tanh(0.5 * x);
    };
    return t;
}

double local_limit_error(const SampledKernel& kernel, double eps, const TestFunction& phi) {
    if (!(eps > 0 && eps <= 0.5)) throw ConfigError("local limit check needs 0 < eps <= 0.5");
    if (kernel.h() > eps * kernel.sample_radius() / 10.0)
        throw ConfigError("kernel sampling too coarse to resolve J_eps; refine h");
    const double alpha = kernel.moments().alpha;
    const double beta = kernel.moments().beta;
    const int m = kernel.radius_index();
    const double hk = kernel.h();
    double worst = 0;
    for (int q = -120; q <= 120; ++q) {
        double x = q * 0.05;
        // J_eps * phi (x) = integral J(s) phi(x - eps s) ds
        double conv = 0;
        for (int j = -m; j <= m; ++j) {
            double w = (j == -m || j == m) ? 0.5 * hk : hk;
            conv += w * kernel.value_at_offset(j) * phi.value(x - eps * j * hk);
        }
        double expansion = phi.value(x) + eps * beta * phi.d1(x) +
                           eps * eps * alpha * phi.d2(x);
        worst = std::max(worst, std::abs(conv - expansion));
    }
    return worst;
}

EvolveResult run_evolution(const Stepper& stepper, const EvolveParams& params) {
    if (!(params.window_right > params.window_left))
        throw ConfigError("evolution window is empty");
    const double h = stepper.kernel().h();
    double dt = params.dt > 0 ? params.dt : stepper.default_dt();

    SimState state;
    state.h = h;
    state.x_left = params.window_left;
    int n = static_cast<int>(std::lround((params.window_right - params.window_left) / h));
    state.U.resize(static_cast<std::size_t>(n + 1));
    for (int i = 0; i <= n; ++i) {
        double x = state.x(i);
        state.U[static_cast<std::size_t>(i)] =
            0.5 * (1.0 + std::tanh((x - params.front_x0) / params.init_width));
    }
    state.ext_left = 0;
    state.ext_right = 1;

    EvolveResult res;
    res.track.level = params.track_level;
    track_front(res.track, state);
    if (params.save_every > 0) {
        res.frames.push_back({state.t, state.U});
        res.frame_axis.push_back({state.x_left, state.h});
    }

    const double width = params.window_right - params.window_left;
    double next_track = params.track_every;
    double next_save = params.save_every;
    int steps = static_cast<int>(std::ceil(params.T / dt - 1e-12));
    for (int s = 0; s < steps; ++s) {
        double step_dt = std::min(dt, params.T - state.t);
        if (step_dt <= 0) break;
        stepper.step(state, step_dt);

        // recenter when the crossing nears a window edge
        FrontTrack probe;
        probe.level = params.track_level;
        track_front(probe, state);
        double xc = probe.positions.back();
        double rel = (xc - state.x_left) / width;
        if (rel < 0.25 || rel > 0.75) {
            int shift = static_cast<int>(std::lround((rel < 0.25 ? -0.5 : 0.5) * width / h));
            std::vector<double> moved(state.U.size());
            for (int i = 0; i <= n; ++i) {
                int j = i + shift;
                double v;
                if (j < 0) v = state.ext_left;
                else if (j > n) v = state.ext_right;
                else v = state.U[static_cast<std::size_t>(j)];
                moved[static_cast<std::size_t>(i)] = v;
            }
            state.U = std::move(moved);
            state.x_left += shift * h;
        }

        if (state.t + 1e-12 >= next_track) {
            track_front(res.track, state);
            next_track = state.t + params.track_every;
        }
        if (params.save_every > 0 && state.t + 1e-12 >= next_save) {
            res.frames.push_back({state.t, state.U});
            res.frame_axis.push_back({state.x_left, state.h});
            next_save = state.t + params.save_every;
        }
    }

    double t_end = res.track.times.back();
    auto fit = measure_speed(res.track, 0.5 * t_end, t_end);
    res.measured_speed = -fit.speed; // traveling-wave convention U(x,t) = u(x + ct)
    res.fit_residual = fit.residual;
    if (res.track.times.size() >= 40) {
        try {
            auto acc = accelerating_detector(res.track);
            res.accelerating = acc.accelerating;
            res.speed_ratio = acc.speed_ratio;
        } catch (const NumericalError&) {
            // dyadic windows undersampled: leave the acceleration flags unset
        }
    }
    res.state = std::move(state);
    return res;
}

} // namespace frontlab
