#pragma once

#include <cmath>
#include <cstdint>

namespace shiftbound::detail {

// Below this |h*alpha| the contraction gap is treated as zero.
inline constexpr double kLimitBranch = 1e-12;

// sum_{k<n} (1-s)^k for s = 1 - L^2, stable as s -> 0.
inline double geometric_sum(double s, std::int64_t n) {
    if (std::abs(s) < 2.0 * kLimitBranch) return static_cast<double>(n);
    return -std::expm1(static_cast<double>(n) * std::log1p(-s)) / s;
}

// (1-s)^n.
inline double contraction_power(double s, std::int64_t n) {
    return std::exp(static_cast<double>(n) * std::log1p(-s));
}

// 1 - (1 - h*lambda)^2 computed without cancellation.
inline double contraction_gap(double h, double lambda) {
    const double u = h * lambda;
    return u * (2.0 - u);
}

}  // namespace shiftbound::detail
