#ifndef FRONTLAB_EVOLUTION_HPP
#define FRONTLAB_EVOLUTION_HPP

#include "frontlab/kernels.hpp"
#include "frontlab/nonlinearity.hpp"

#include <complex>
#include <functional>
#include <utility>
#include <vector>

namespace frontlab {

// Evolving field on a uniform window. Outside the window the field continues
// with the declared constant equilibrium values.
struct SimState {
    double h = 0.05;
    double x_left = 0;
    std::vector<double> U;
    double t = 0;
    double ext_left = 0;
    double ext_right = 1;

    int nodes() const { return static_cast<int>(U.size()); }
    double x(int i) const { return x_left + i * h; }
    double x_right() const { return x(nodes() - 1); }
};

// Explicit RK4 stepper for U' = J*U - U + f(U). The convolution runs directly
// for narrow kernels and through an FFT plan when the kernel reach is wide;
// constant exterior states enter as kernel tail masses.
class Stepper {
public:
    Stepper(SampledKernel kernel, Nonlinearity f);

    // stability policy dt = 0.5 / (1 + Lip f)
    double default_dt() const { return 0.5 / (1.0 + lip_); }
    void step(SimState& state, double dt) const;
    const SampledKernel& kernel() const { return kernel_; }
    const Nonlinearity& reaction() const { return f_; }

private:
    void convolve(const SimState& state, const std::vector<double>& U,
                  std::vector<double>& out) const;
    void rhs(const SimState& state, const std::vector<double>& U,
             std::vector<double>& out) const;

    SampledKernel kernel_;
    Nonlinearity f_;
    double lip_ = 0;
    bool use_fft_ = false;
    mutable std::vector<std::complex<double>> kernel_hat_; // sized lazily per window
    mutable std::vector<std::complex<double>> buf_;
    mutable int planned_nodes_ = -1;
    mutable std::vector<double> scratch_;
};

struct FrontTrack {
    double level = 0.5;
    std::vector<double> times;
    std::vector<double> positions; // level crossings in absolute coordinates
};

// Appends the current level crossing (linear interpolation) to the track.
// Throws NumericalError when the crossing has left the window.
void track_front(FrontTrack& track, const SimState& state);

struct SpeedFit {
    double speed = 0;     // least-squares slope of x(t)
    double residual = 0;  // rms of the fit residuals
    int samples = 0;
};

// Least-squares slope of the track over [t_begin, t_end]; needs >= 20 samples.
SpeedFit measure_speed(const FrontTrack& track, double t_begin, double t_end);

struct AccelReport {
    bool accelerating = false;
    double speed_ratio = 0;
    SpeedFit early, late;
};

// Compares fitted speeds on the dyadic windows [T/2, T] and [T, 2T] with
// 2T the track end; accelerating when the ratio exceeds 1.10 and both fits
// are clean.
AccelReport accelerating_detector(const FrontTrack& track);

// Smooth test function with analytic derivatives for the local-limit check.
struct TestFunction {
    std::function<double(double)> value, d1, d2;
    static TestFunction gaussian_bump();
    static TestFunction tanh_profile();
};

// sup over test points of |J_eps * phi - phi - eps beta phi' - eps^2 alpha phi''|
// with J_eps(x) = J(x/eps)/eps. The caller checks error/eps^2 shrinks with eps.
double local_limit_error(const SampledKernel& kernel, double eps, const TestFunction& phi);

struct EvolveParams {
    double T = 100;
    double dt = 0;          // 0: stability policy
    double window_left = -150;
    double window_right = 50;
    double track_level = 0.5;
    double track_every = 0.5;     // time between track samples
    double save_every = 0;        // time between saved frames; 0 = none
    double front_x0 = 0;          // initial crossing position
    double init_width = 1.0;      // tanh-like initial interface width
};

struct EvolveResult {
    SimState state;
    FrontTrack track;
    double measured_speed = 0; // traveling-wave convention: -dx_front/dt
    double fit_residual = 0;
    bool accelerating = false;
    double speed_ratio = 0;
    std::vector<std::pair<double, std::vector<double>>> frames;
    std::vector<std::pair<double, double>> frame_axis; // x_left and h per frame
};

// Increasing-datum run (0 on the left, 1 on the right) with automatic window
// recentering. The reported speed uses the traveling-wave convention
// U(x,t) = u(x + c t), i.e. the negated slope of the front position.
EvolveResult run_evolution(const Stepper& stepper, const EvolveParams& params);

} // namespace frontlab

#endif
