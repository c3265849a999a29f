#pragma once

#include "shiftbound/divergence.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace shiftbound {

enum class KernelKind { langevin_euler, ito_euler, convolution, abstract };

// One-step regularity data of a Markov kernel: R_q(delta_x P || delta_y P) <= c |x - y|^2
// and W(delta_x P, delta_y P) <= L |x - y|.
struct KernelSpec {
    KernelKind kind = KernelKind::abstract;
    double h = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double lambda = 2.0;
    double Lambda = 2.0;
    double c = 0.0;
    double L = 1.0;
    // KL constant required alongside a q < 1 bound; not used by the bound itself.
    std::optional<double> c_prime;

    static KernelSpec abstract_kernel(double c, double L);
    // Euler step of Langevin diffusion with alpha I <= Hess V <= beta I.
    static KernelSpec langevin_euler(double alpha, double beta, double h);
    // Euler step of an Ito diffusion under the monotonicity and ellipticity constants.
    static KernelSpec ito_euler(double alpha, double beta, double lambda, double Lambda, double h);

    double one_step_constant(RenyiOrder q) const;
    // 1 - L^2, computed without cancellation where the kernel allows.
    double contraction_gap() const;
};

enum class CostKind { sq_dist, w2_sq, exp_coupling, refined_1, refined_2 };

const char* to_string(CostKind k);

struct BoundReport {
    RenyiOrder order = RenyiOrder::kl();
    double constant = 0.0;
    CostKind cost_kind = CostKind::sq_dist;
    bool finite = true;
    std::string theorem_tag;
    double value = 0.0;
};

// Equal-weight empirical coupling.
struct CouplingSample {
    std::vector<std::pair<Vector, Vector>> pairs;

    void validate() const;
    static CouplingSample from_1d(const std::vector<double>& xs, const std::vector<double>& ys);
};

// Sorted-rank pairing of two equal-size 1D samples.
CouplingSample quantile_coupling(std::vector<double> xs, std::vector<double> ys);
// Pairing after a seeded random permutation of ys.
CouplingSample independent_coupling(const std::vector<double>& xs, std::vector<double> ys, std::uint64_t seed);

struct SquaredDistance {
    double value;
};

// Coupling under which x - y ~ N(0, variance I_dim).
struct GaussianOffset {
    double variance;
    int dim = 1;
};

using CouplingCost = std::variant<SquaredDistance, CouplingSample, GaussianOffset>;

using PointwiseRho = std::function<double(const Vector&, const Vector&)>;

BoundReport multi_step_bound(const KernelSpec& kernel, std::int64_t N, RenyiOrder q, double sq_dist);

BoundReport langevin_discrete_bound(const KernelSpec& kernel, std::int64_t N, RenyiOrder q, const CouplingCost& cost);

BoundReport langevin_continuous_bound(double alpha, double T, RenyiOrder q, const CouplingCost& cost);

BoundReport convexity_lift(const PointwiseRho& rho, RenyiOrder q, const CouplingSample& coupling);

enum class RefinedVariant { first, second };

BoundReport refined_renyi_bound(const PointwiseRho& rho, RenyiOrder q, const CouplingSample& coupling,
                                RefinedVariant variant);

// Refined bound for rho = coef |x - y|^2 against a Dirac target with x - y ~ N(0, variance I_dim).
BoundReport refined_renyi_bound(double rho_coef, RenyiOrder q, const GaussianOffset& offset, RefinedVariant variant);

BoundReport mult_noise_bound(const KernelSpec& kernel, std::int64_t N, double sq_dist);

BoundReport clt_bound(const Matrix& fisher_info, const Vector& x, const Vector& y);

RenyiOrder weak_triangle_compose(RenyiOrder q0, RenyiOrder q1);

// Composes R_{q_i} <= C q_i d^2 through the geodesic midpoint.
BoundReport compose_order_bound(RenyiOrder q0, RenyiOrder q1, double C, double sq_dist);

struct ShiftedStep {
    double dist_to_shifted;
    double one_step_c;
};

double shifted_composition_specialize(const std::vector<ShiftedStep>& steps, double prior_div);

}  // namespace shiftbound
