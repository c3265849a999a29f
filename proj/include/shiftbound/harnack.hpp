#pragma once

#include "shiftbound/bounds.hpp"
#include "shiftbound/divergence.hpp"
#include "shiftbound/ou_exact.hpp"
#include "shiftbound/simulation.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace shiftbound::harnack {

struct HarnackConstant {
    enum class Kind { power, log, reverse };
    Kind kind = Kind::power;
    double p = 0.0;
    // Multiplicative constant for power, additive for log, exp(-R_q / |p|) factor for reverse.
    double constant = 1.0;
    std::string provenance;
};

// C_p = exp(((q - 1) / q) R_q) with q = p / (p - 1).
HarnackConstant power_harnack_constant(const BoundReport& renyi_bound, double p);
HarnackConstant log_harnack_constant(const BoundReport& kl_bound);
// p < 0 pairs with q = p / (p - 1) in (0, 1).
HarnackConstant reverse_harnack_constant(const BoundReport& renyi_bound, double p);

// Scalar test function.
struct TestFunction {
    enum class Kind { linear, quadratic_clipped, exp_affine, indicator_halfspace, custom };
    Kind kind = Kind::linear;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double lo = -kInf;
    double hi = kInf;
    std::function<double(double)> fn;

    // a + b z
    static TestFunction linear(double a, double b);
    // clamp(a + b z + c z^2, lo, hi)
    static TestFunction quadratic_clipped(double a, double b, double c, double lo, double hi);
    // exp(a z + b)
    static TestFunction exp_affine(double a, double b);
    // 1{z >= a}
    static TestFunction indicator_halfspace(double a);
    static TestFunction custom(std::function<double(double)> fn);

    double operator()(double z) const;
    // Points where f fails to be smooth.
    std::vector<double> kinks() const;
};

// Laws delta_x P and delta_y P, either exactly Gaussian or as independent samples.
struct GaussianOutputs {
    GaussianLaw1D mu;
    GaussianLaw1D nu;
};

struct SampleOutputs {
    std::vector<double> mu;
    std::vector<double> nu;
};

using KernelOutputs = std::variant<GaussianOutputs, SampleOutputs>;

GaussianOutputs ou_outputs(const OUSpec& spec, OUMode mode, double x, double y);

// Euler-Maruyama samples from x and y on independent seeds.
SampleOutputs sample_outputs(const sim::PotentialSpec& potential, double h, std::int64_t steps, double x, double y,
                             std::uint64_t seed, std::int64_t n_paths);

SampleOutputs sample_outputs(const sim::ItoSpec& spec, double h, std::int64_t steps, double x, double y,
                             std::uint64_t seed, std::int64_t n_paths);

// Extremal test functions built from r = d mu / d nu for Gaussians of equal variance.
TestFunction power_extremizer(const GaussianOutputs& out, double p);
TestFunction log_extremizer(const GaussianOutputs& out);
TestFunction reverse_extremizer(const GaussianOutputs& out, double p);

struct CheckResult {
    std::string inequality;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    double se = 0.0;
    bool holds = false;
    // Signed margin in the direction of the inequality.
    double gap = 0.0;
    double rel_gap() const;
};

// Slack is floating resolution for exact laws and 4 standard errors for samples.
inline constexpr double kSeSlack = 4.0;

// (P f(x))^p <= P(f^p)(y) C_p^p.
CheckResult check_power_harnack(const KernelOutputs& out, const TestFunction& f, const HarnackConstant& c);

// P(log f)(x) <= log P f(y) + C_log.
CheckResult check_log_harnack(const KernelOutputs& out, const TestFunction& f, const HarnackConstant& c);

// P f(x) >= (P(f^p)(y))^{1/p} exp(-R_q / |p|).
CheckResult check_reverse_harnack(const KernelOutputs& out, const TestFunction& f, const HarnackConstant& c);

// Var_{P_t}(f)(x) >= ((e^{2 alpha t} - 1) / alpha) |grad P_t f(x)|^2 for polynomial f of degree <= 2.
CheckResult check_local_poincare(const OUSpec& ou, const TestFunction& f, double x);

// Donsker-Varadhan form: E_mu f - log E_nu e^f, to be compared against a KL bound.
double donsker_varadhan(const KernelOutputs& out, const TestFunction& f);

struct DistributionalResult {
    CheckResult unrefined;
    CheckResult refined_first;
    CheckResult refined_second;
    // Present when a KL pointwise bound is supplied.
    std::optional<CheckResult> log_route;
};

using GaussianKernel = std::function<GaussianLaw1D(double)>;

// Distributional power Harnack over an empirical coupling of 1D points, with C_p(x, y) = exp(rho_q(x, y) / p).
DistributionalResult distributional_harnack(const CouplingSample& coupling, const GaussianKernel& kernel,
                                            const TestFunction& f, double p, const PointwiseRho& rho_q,
                                            const PointwiseRho& rho_kl = {});

}  // namespace shiftbound::harnack
