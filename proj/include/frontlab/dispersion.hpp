#ifndef FRONTLAB_DISPERSION_HPP
#define FRONTLAB_DISPERSION_HPP

#include "frontlab/kernels.hpp"
#include "frontlab/nonlinearity.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace frontlab {

// Which exponential integrand the curve was built from: Leftward is the
// J(-x) e^(lambda x) orientation (increasing fronts), Rightward uses
// J(x) e^(lambda x).
enum class Orientation { Leftward, Rightward };

struct DispersionCurve {
    Orientation orientation = Orientation::Leftward;
    std::vector<double> lambda; // log-spaced sample grid
    std::vector<double> c;      // c(lambda) = (M(lambda) + f'(0) - 1) / lambda
};

struct SpeedResult {
    double speed = 0;
    std::optional<double> lambda_star; // none when the minimum was not bracketed
    bool attained = false;             // false: infimum sits at the lambda_max boundary
    double lambda_max = 0;
    DispersionCurve curve;
    std::string warning;
};

// Minimal-speed formula for increasing fronts: inf over lambda > 0 of
// (M(lambda) + f'(0) - 1)/lambda with M(lambda) = integral J(-x) e^(lambda x) dx.
// Throws NumericalError when the kernel violates the Mollison condition.
SpeedResult c1(const SampledKernel& kernel, const Nonlinearity& f);

// Same formula with the rightward integrand integral J(x) e^(lambda x) dx.
SpeedResult c_star_left(const SampledKernel& kernel, const Nonlinearity& f);

enum class RootMultiplicity { Simple, Double };

struct LambdaRoot {
    double lambda = 0;
    RootMultiplicity multiplicity = RootMultiplicity::Simple;
};

// Minimal positive root of phi(lambda) = -c lambda + M(lambda) + f'(0) - 1.
// Requires c >= c1 - 1e-9; the root is double at c == c1.
LambdaRoot lambda_of_c(const SampledKernel& kernel, const Nonlinearity& f, double c);

// A-priori bound nu/mu on the ignition front speed, mu = min(rho, 1-rho),
// nu = integral |z| J(z) dz.
double speed_bracket(const SampledKernel& kernel, const Nonlinearity& f_ignition);

// Globally defined supersolution candidate: exponential left tail, saturating
// right tail, quintic blends in between, w(0) = 1/2.
class Supersolution {
public:
    double kappa = 0;        // speed for which (w, kappa) is a supersolution
    double kappa0 = 0, kappa1 = 0, kappa2 = 0, kappa3 = 0;
    double lambda = 0, delta = 0, N = 0;

    double value(double x) const;
    double derivative(double x) const;
    double operator()(double x) const { return value(x); }

    friend Supersolution build_supersolution(const SampledKernel&, const Nonlinearity&,
                                             double, double, double);

private:
    // left blend: w = e^(lambda x)(1 - psi(x)) on [-N, 0]; right blend:
    // w = 1 - e^(-delta x) + phi(x) on [0, N]; quintic Hermite coefficients
    std::array<double, 6> left_coef{};  // psi on [-N, 0]
    std::array<double, 6> right_coef{}; // phi on [0, N]
};

// Requires lambda > delta > 0 and a kernel with a reliable MGF at lambda.
// Throws NumericalError("increase N") when the blend cannot stay monotone
// under the e^(lambda x) ceiling.
Supersolution build_supersolution(const SampledKernel& kernel, const Nonlinearity& f,
                                  double lambda, double delta, double N);

struct VerifyReport {
    bool ok = false;
    double worst_violation = 0; // max over test points of the defect
    double location = 0;
};

// Checks J*w - w - kappa w' + f(w) <= 1e-8 on a grid of test points; w and w'
// must be defined on all of R (analytic tails included).
VerifyReport verify_supersolution(const std::function<double(double)>& w,
                                  const std::function<double(double)>& wprime,
                                  double kappa, const SampledKernel& kernel,
                                  const Nonlinearity& f, double x_lo = -40,
                                  double x_hi = 40);

VerifyReport verify_supersolution(const Supersolution& w, double kappa,
                                  const SampledKernel& kernel, const Nonlinearity& f);

} // namespace frontlab

#endif
