#pragma once

#include "shiftbound/divergence.hpp"

#include <cstdint>

namespace shiftbound {

// dX = -alpha X dt + sqrt(2) dB and its Euler discretization.
struct OUSpec {
    double alpha = 1.0;
    double h = 0.1;
    std::int64_t N = 1;
    double T = 1.0;

    static OUSpec discrete(double alpha, double h, std::int64_t N);
    static OUSpec continuous(double alpha, double T);
};

enum class OUMode { discrete, continuous };

GaussianLaw1D ou_discrete_law(const OUSpec& spec, double x);
GaussianLaw1D ou_continuous_law(const OUSpec& spec, double x);

// Coefficient C with R_q = C * (x - y)^2.
double ou_renyi_constant(const OUSpec& spec, RenyiOrder q, OUMode mode);

DivergenceValue ou_renyi_exact(const OUSpec& spec, double x, double y, RenyiOrder q, OUMode mode);

// Isotropic d-dimensional wrapper; coordinates evolve independently.
DivergenceValue ou_renyi_exact(const OUSpec& spec, const Vector& x, const Vector& y, RenyiOrder q,
                               OUMode mode);

enum class ThresholdVariant { refined, unrefined };

// Horizon after which R_q(mu P_T || nu P_T) is finite for mu = N(0, sigma2), nu = delta_0.
double finiteness_threshold(double alpha, double sigma2, RenyiOrder q, ThresholdVariant variant);

}  // namespace shiftbound
