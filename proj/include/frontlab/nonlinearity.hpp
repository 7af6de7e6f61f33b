#ifndef FRONTLAB_NONLINEARITY_HPP
#define FRONTLAB_NONLINEARITY_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace frontlab {

// Holder-type lower-bound data for u - f(u) near 0 and the C^{1,gamma}
// exponent. Supplied by family defaults or by the user; never estimated.
struct HolderData {
    double A = 1.0;
    double m = 1.0;
    double delta = 0.1;
    double gamma = 1.0;
};

struct ClassificationViolation {
    double u = 0;       // worst offending point
    double excess = 0;  // how far past the tolerance
};

struct Classification {
    bool monostable = false;
    bool kpp = false;
    bool ignition = false;
    double rho = 0;  // ignition threshold when the flag is set
    ClassificationViolation worst_monostable, worst_kpp, worst_ignition;
};

// A reaction term f with evaluators on [-0.1, 1.1]. Immutable; evaluators are
// pure and safe to share.
struct Nonlinearity {
    std::function<double(double)> f;
    std::function<double(double)> fp;
    double fprime0 = 0;
    double fprime1 = 0;
    HolderData holder;
    std::string family;

    double operator()(double u) const { return f(u); }
    // 1.0 safety-free sampled Lipschitz constant of f on [0,1]
    double lipschitz() const;
};

Nonlinearity make_logistic(double r);
// f(u) = r u (1-u) (1 + a u)
Nonlinearity make_cubic(double r, double a);
// f = 0 on [0,rho], amp (u-rho)^2 (1-u) beyond; C^1 at rho
Nonlinearity make_ignition(double rho, double amp);
// monotone cubic spline through (u_i, f_i); endpoints must hit (0,0) and (1,0).
// Endpoint slopes default to the boundary secants unless overridden.
Nonlinearity make_spline(const std::vector<double>& u, const std::vector<double>& v,
                         std::optional<double> slope0 = std::nullopt,
                         std::optional<double> slope1 = std::nullopt);

// Smoothed-step cutoff built from the standard bump: eta(s) = 0 for s <= 1,
// 1 for s >= 2, strictly increasing between. eta_theta(s) = eta(s/theta).
struct CutoffFamily {
    double theta;
    explicit CutoffFamily(double theta_);
    double eta(double s) const;
    double eta_prime(double s) const;
    static double base(double s);
    static double base_prime(double s);
};

// Dense-sampling classification (1e4 points, tolerance 1e-10). Throws
// InvariantError when f(0) or f(1) are nonzero beyond 1e-12.
Classification classify(const Nonlinearity& f, int samples = 10000);

// f * eta_theta: ignition approximation of a monostable f; threshold rho = theta.
Nonlinearity ignition_approx(const Nonlinearity& f, double theta);

struct GAnalysis {
    bool monotone = false;     // g = u - f(u) non-decreasing on [0,1]
    bool has_plateau = false;
    double alpha_hat = 0;      // interior maximum of g
    double beta_hat = 0;       // interior minimum of g
    double a = 0, b = 0;       // level-matched pair, g(a) == g(b)
    double level = 0;
};

// Locates the sign changes of g' = 1 - f' by bisection to 1e-10 and the
// level-matched plateau pair when g has the increasing/decreasing/increasing
// pattern. Multi-well g is rejected.
GAnalysis g_analysis(const Nonlinearity& f);

} // namespace frontlab

#endif
