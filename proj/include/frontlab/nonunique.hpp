#ifndef FRONTLAB_NONUNIQUE_HPP
#define FRONTLAB_NONUNIQUE_HPP

#include "frontlab/kernels.hpp"
#include "frontlab/nonlinearity.hpp"
#include "frontlab/profile_solver.hpp"

#include <array>
#include <vector>

namespace frontlab {

// Shipped configuration for the discontinuous-front demonstration: a KPP
// reaction with 0 < f'(0) < 1 whose g = u - f(u) has one non-monotone
// interval, and a rightward-biased smooth kernel with c1 <= 0.
struct NonuniqueCase {
    Nonlinearity f;
    KernelFamily family;
    GAnalysis g_info;
    double c1_value = 0; // verified <= 0 at construction
};

// Builds and certifies the shipped case (classifier, plateau pair, c1 sign).
// Throws InvariantError if any certificate fails.
NonuniqueCase build_nonunique_case(double h = 0.01);

// Smooth strictly increasing regularization of the plateau truncation g~:
// g_n == g outside [a - delta_a, b + delta_b], a linear stretch of slope 1/n
// through the plateau, quintic shoulders matched C^1.
class RegularizedG {
public:
    RegularizedG(const Nonlinearity& f, const GAnalysis& ga, int n);

    int index() const { return n_; }
    double operator()(double u) const;
    double derivative(double u) const;
    double g_tilde(double u) const; // the plateau truncation itself
    double sup_distance() const { return sup_distance_; } // to g~, sampled
    double inverse(double target) const; // Newton-polished table inverse
    double a() const { return a_; }
    double b() const { return b_; }

private:
    Nonlinearity f_;
    int n_ = 0;
    double a_ = 0, b_ = 0, level_ = 0;
    double da_ = 0, db_ = 0, slope_ = 0;
    std::array<double, 6> left_coef_{}, right_coef_{};
    double sup_distance_ = 0;
    std::vector<double> table_u_, table_g_;
};

struct RegularizedSolve {
    Profile profile; // pinned by translation: value at x = 0 equals the pin
    int iterations = 0;
    double final_change = 0;
    double residual = 0; // sup |J*u - g_n(u)| on covered nodes
};

// Stationary solve J*u = g_n(u) by the pointwise inverse iteration with
// equilibrium tails, recentered by integer shifts and pinned at the end.
RegularizedSolve solve_regularized(const SampledKernel& kernel, const RegularizedG& gn,
                                   const Grid& grid, double pin, double tol = 1e-10,
                                   int max_iterations = 60000);

struct DiscontinuousLimit {
    Profile limit;        // the discontinuous solution of J*u = g~(u), pinned at a
    Profile extrapolant;  // nodewise extrapolation over the regularization levels
    double refinement_distance = 0; // off-jump sup distance extrapolant vs limit
    double jump_left = 0;    // estimated u(0-)
    double jump_right = 0;   // estimated u(0+)
    double jump_size = 0;
    bool separation_ok = false;     // jump >= (b - a)/2
    double residual_offjump = 0;    // sup |J*u - g~(u)| away from the jump
    double conv_max_increment = 0;  // max node-to-node increment of J*u
    double conv_increment_bound = 0;
    bool conv_continuous_ok = false;
};

// Pointwise limit of the regularized solutions by Richardson extrapolation in
// 1/n (levels must come pinned at the same value with doubling indices).
DiscontinuousLimit extract_discontinuous_limit(const std::vector<Profile>& levels,
                                               const SampledKernel& kernel,
                                               const RegularizedG& finest,
                                               const GAnalysis& ga);

} // namespace frontlab

#endif
