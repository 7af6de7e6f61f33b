#ifndef FRONTLAB_KERNELS_HPP
#define FRONTLAB_KERNELS_HPP

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace frontlab {

enum class KernelTag { Uniform, Bump, Gaussian, Mixture, AlgebraicTail };

// One component of a mixture. Mixtures do not nest and cannot contain
// algebraic tails.
struct KernelComponent {
    KernelTag tag = KernelTag::Uniform;
    double weight = 1.0;
    double a = -1.0, b = 1.0;       // uniform endpoints
    double center = 0.0, width = 1.0; // bump
    double mean = 0.0, sigma = 1.0; // gaussian
};

// Analytic descriptor of a dispersal kernel family. Densities are
// normalized to unit mass.
struct KernelFamily {
    KernelTag tag = KernelTag::Uniform;
    double a = -1.0, b = 1.0;
    double center = 0.0, width = 1.0;
    double mean = 0.0, sigma = 1.0;
    double p = 3.0; // algebraic tail exponent, density ~ (1+|x|)^-p
    std::vector<KernelComponent> components;

    static KernelFamily uniform(double a, double b);
    static KernelFamily bump(double center, double width);
    static KernelFamily gaussian(double mean, double sigma);
    static KernelFamily algebraic_tail(double p);
    static KernelFamily mixture(std::vector<KernelComponent> comps);

    KernelFamily reflected() const;

    double density(double x) const;
    bool compact_support() const;
    // Finite endpoints for compact families, +-inf markers otherwise.
    std::pair<double, double> support() const;
    // Smallest radius T such that the mass outside [-T, T] is below `omitted`.
    double truncation_radius(double omitted) const;
    bool mollison() const;   // one-sided exponential integrability for some lambda > 0
    bool c1_smooth() const;
    // Closed-form M(lambda) = integral of J(u) e^(-lambda u) du, where available.
    bool has_analytic_mgf() const;
    double analytic_mgf(double lambda) const;

    void validate() const; // throws ConfigError on bad parameters
};

struct KernelMoments {
    double mass = 0;  // trapezoid mass after normalization (== 1)
    double mean = 0;  // first moment
    double nu = 0;    // integral of |z| J(z)
    double alpha = 0; // 1/2 integral of z^2 J(z)
    double beta = 0;  // integral of J(-z) z dz == -mean
};

// A kernel sampled on a uniform symmetric grid x_i = i*h, |i| <= n,
// normalized so the trapezoid mass equals 1. Immutable after construction;
// safe to share read-only across workers.
class SampledKernel {
public:
    double h() const { return h_; }
    int radius_index() const { return n_; }
    double sample_radius() const { return n_ * h_; }
    const std::vector<double>& values() const { return values_; }

    // J(i*h); zero outside the sampled range.
    double value_at_offset(int i) const {
        return (i < -n_ || i > n_) ? 0.0 : values_[static_cast<std::size_t>(i + n_)];
    }
    double max_value() const;

    // Trapezoid prefix mass up to node k: integral over [-n*h, k*h] with the
    // usual half-weights at both ends. prefix_mass(-n-1) == 0, prefix_mass(n) == 1.
    double prefix_mass(int k) const;
    double upper_tail_from(int k) const { return 1.0 - prefix_mass(k); }

    const KernelMoments& moments() const { return moments_; }
    const std::optional<KernelFamily>& family() const { return family_; }

    std::pair<double, double> declared_support() const { return support_; }
    // Radius at which an infinite tail would have to be cut for omitted mass
    // below 1e-12, and what the sampling actually covers.
    double truncation_radius() const { return truncation_radius_; }
    double omitted_mass() const { return omitted_mass_; }
    bool truncated() const { return omitted_mass_ > 0.0; }
    bool c1_smooth() const;

    // M(lambda) = integral J(-x) e^(lambda x) dx = integral J(u) e^(-lambda u) du
    // by trapezoid quadrature on the samples. Throws NumericalError when the
    // exponent overflows double range.
    double mgf(double lambda) const;
    // True when the quadrature edge weight e^(lambda x) at the truncation edge
    // stays below 1e-6 of the integral (always true for compact families).
    bool mgf_edge_ok(double lambda) const;
    // Largest lambda in (0, 50] with mgf_edge_ok; 50 for compact support.
    double max_reliable_lambda() const;

    void dump_csv(const std::string& path) const;

    friend SampledKernel build_kernel(const KernelFamily&, double, double, double);
    friend SampledKernel kernel_from_samples(double, std::vector<double>,
                                             std::optional<KernelFamily>);
    friend SampledKernel reflect(const SampledKernel&);

private:
    SampledKernel() = default;
    void finalize(bool renormalize = true); // prefix sums, moments, mass checks

    double h_ = 0;
    int n_ = 0;
    std::vector<double> values_;
    std::vector<double> prefix_; // prefix_[k+n] = trapezoid mass up to node k
    KernelMoments moments_;
    std::optional<KernelFamily> family_;
    std::pair<double, double> support_{0, 0};
    double truncation_radius_ = 0;
    double omitted_mass_ = 0;
};

// Sample a family on grid spacing h. Infinite tails are cut where the omitted
// mass drops below 1e-12, subject to the radius cap; the sampled kernel is
// renormalized and the pre-normalization omitted mass recorded. min_radius
// widens the sampled range (needed when convolutions must reach far offsets).
SampledKernel build_kernel(const KernelFamily& family, double h,
                           double min_radius = 0.0, double max_radius = 100.0);

// Wrap externally produced samples (values at i*h, |i| <= (size-1)/2).
SampledKernel kernel_from_samples(double h, std::vector<double> values,
                                  std::optional<KernelFamily> family = std::nullopt);

// J~(x) = J(-x). Exact sample flip; reflect(reflect(k)) == k.
SampledKernel reflect(const SampledKernel& k);

struct MollisonReport {
    bool satisfied = false;
    double witness_lambda = 0; // a lambda > 0 with finite one-sided exponential moment
    std::string diagnosis;
};

MollisonReport mollison_check(const SampledKernel& k);

// Axis-aligned gaussian density in dimension dim <= 3.
struct DirectionalDensity {
    int dim = 2;
    std::array<double, 3> mean{0, 0, 0};
    std::array<double, 3> sigma{1, 1, 1};
};

// J(s) = integral of the density over the hyperplane <y,e> = s, computed by
// tensor trapezoid quadrature over the hyperplane coordinates.
SampledKernel project_direction(const DirectionalDensity& density,
                                const std::array<double, 3>& e, double h);

} // namespace frontlab

#endif
