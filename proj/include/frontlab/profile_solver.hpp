#ifndef FRONTLAB_PROFILE_SOLVER_HPP
#define FRONTLAB_PROFILE_SOLVER_HPP

#include "frontlab/dispersion.hpp"
#include "frontlab/kernels.hpp"
#include "frontlab/nonlinearity.hpp"

#include <optional>
#include <string>
#include <vector>

namespace frontlab {

// Uniform grid on [-r, R]; R + r must be an exact multiple of h.
struct Grid {
    double h = 0.02;
    double r = 20;
    double R = 20;

    int nodes() const;                  // node count (R + r)/h + 1
    double x(int i) const { return -r + i * h; }
    void validate(const SampledKernel& kernel) const;
};

struct Profile {
    Grid grid;
    double x_offset = 0; // applied translation: node i sits at grid.x(i) + x_offset
    std::vector<double> u;
    double c = 0;
    double eps = 0;
    double theta = 0;

    double x(int i) const { return grid.x(i) + x_offset; }
    double x_min() const { return x(0); }
    double x_max() const { return x(static_cast<int>(u.size()) - 1); }
    // linear interpolation; clamps to the boundary values outside the range
    double value_at(double x) const;
    // position where u crosses `level` (linear interpolation between nodes)
    double level_crossing(double level = 0.5) const;
    bool monotone(double tol = 1e-12) const;
    void dump_csv(const std::string& path) const;
};

struct IterationReport {
    int iterations = 0;
    double final_change = 0;
    bool ordering_checked = false; // iterate-ordering was asserted (constant start)
    bool monotone_iterates = false;
    bool change_decays_after_transient = true; // sup-change non-increasing past the formation peak
    bool centered_polish_applied = false;
    bool centered_polish_rejected = false; // fell back to the upwind solution
    std::vector<double> change_history;
};

struct SolveConfig {
    double tol = 1e-10;
    int max_iterations = 60000;
    bool ascending = true;           // constant start at theta; false: start at 1
    bool centered_correction = true; // polish to the centered-difference fixed point
    double lipschitz_safety = 1.1;
    std::optional<std::vector<double>> warm_start;
};

struct BoundaryCorrections {
    std::vector<double> hr; // theta * mass of J beyond the left end
    std::vector<double> hR; // mass of J beyond the right end
};

BoundaryCorrections boundary_corrections(const SampledKernel& kernel, const Grid& grid,
                                         double theta);

struct SolveResult {
    Profile profile;
    IterationReport report;
};

// Monotone sub/supersolution sweep for the truncated problem with Dirichlet
// data theta at -r and 1 at R. See SolveConfig for the start and the optional
// centered polish.
SolveResult solve_truncated(const SampledKernel& kernel, const Nonlinearity& f,
                            const Grid& grid, double c, double eps, double theta,
                            const SolveConfig& config = {});

struct ContinuationResult {
    Profile profile;                     // recentered: half-crossing at x = 0
    std::vector<double> eps_used;
    std::vector<double> aligned_steps;   // sup distance between consecutive steps
    bool reached_zero = false;           // final eps is exactly 0
    IterationReport final_report;        // from the last eps step
};

// Warm-started eps -> 0 continuation. Default schedule 0.1 * 2^-k, 12 steps,
// then exactly 0 when c != 0.
ContinuationResult viscosity_continuation(const SampledKernel& kernel, const Nonlinearity& f,
                                          const Grid& grid, double c, double theta,
                                          std::vector<double> eps_schedule = {},
                                          const SolveConfig& config = {});

struct ExtensionResult {
    Profile profile;
    bool converged = false;
    std::vector<double> aligned_history; // sup distance across domain doublings
    std::vector<double> continuation_steps;
    IterationReport final_report;
    std::string diagnosis;
};

// Continuation on the base grid, then repeated domain doubling until the
// aligned profiles differ by less than 1e-6. Non-convergence is flagged, not
// silently returned (it indicates c below the minimal speed).
ExtensionResult extend_domain(const SampledKernel& kernel, const Nonlinearity& f,
                              const Grid& base, double c, double theta,
                              int max_doublings = 3, const SolveConfig& config = {},
                              std::vector<double> eps_schedule = {});

// sup over interior nodes of |J*u - u - c (centered difference) + f(u)| with
// the exterior extended by 0 on the left and 1 on the right.
double residual(const Profile& p, const SampledKernel& kernel, const Nonlinearity& f);

struct ShootingResult {
    double c = 0;
    Profile profile;
    int solves = 0;
    double phi = 0;          // pin mismatch at the returned speed
    int sign_changes = 1;    // coarse-scan count of crossings of the shooting map
};

// Bisection on the speed: Phi(c) = u_c(0) - pin_level with the boundary-pinned
// truncated solve. The bracket must produce a sign change.
ShootingResult front_speed_by_shooting(const SampledKernel& kernel, const Nonlinearity& f,
                                       const Grid& grid, double eps, double pin_level,
                                       double bracket, const SolveConfig& config = {});

// Unique-speed solve for an ignition nonlinearity; bracket from the a-priori
// bound nu/mu.
ShootingResult ignition_speed(const SampledKernel& kernel, const Nonlinearity& f_ignition,
                              const Grid& grid, double eps, const SolveConfig& config = {});

struct MinimalSpeedResult {
    double c_star = 0;            // extrapolated limit of the cutoff speeds
    std::vector<double> thetas;
    std::vector<double> c_thetas; // non-decreasing as theta decreases
};

// Ignition speeds for f * eta_theta over a decreasing theta schedule
// (default 0.2 * 2^-k, 8 steps) with a cutoff-law extrapolation to theta -> 0.
MinimalSpeedResult minimal_speed_monostable(const SampledKernel& kernel,
                                            const Nonlinearity& f, const Grid& grid,
                                            double eps,
                                            std::vector<double> theta_schedule = {},
                                            const SolveConfig& config = {});

struct TailFit {
    double lambda_hat = 0;   // slope of the selected fit
    bool log_corrected = false;
    double fit_r2 = 0;
    double lambda_plain = 0;
    double lambda_corrected = 0;
    double residual_plain = 0;     // rms regression residuals
    double residual_corrected = 0;
    double lambda_of_c_value = 0;  // dispersion-root reference
    bool smoothness_warning = false; // kernel below C^1: asymptotics hypotheses unmet
};

TailFit tail_fit(const Profile& p, const SampledKernel& kernel, const Nonlinearity& f,
                 double c);

struct AlignResult {
    double shift = 0;
    double sup_distance = 0;
};

// Translates p2 so the half-crossings match, then sup-norm on the overlap.
AlignResult align_and_compare(const Profile& p1, const Profile& p2);

} // namespace frontlab

#endif
