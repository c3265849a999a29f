#include "shiftbound/ou_exact.hpp"

#include "shiftbound/detail/geometric.hpp"

#include <cmath>
#include <stdexcept>

namespace shiftbound {

namespace {

void validate_discrete(const OUSpec& s) {
    if (!(s.h > 0.0)) throw std::invalid_argument("OUSpec: h must be positive");
    if (s.N < 1) throw std::invalid_argument("OUSpec: N must be at least 1");
}

void validate_continuous(const OUSpec& s) {
    if (!(s.T > 0.0)) throw std::invalid_argument("OUSpec: T must be positive");
}

double order_value(RenyiOrder q) {
    if (q.is_infinity()) throw std::domain_error("ou_renyi_exact: order must be finite");
    return q.value();
}

}  // namespace

OUSpec OUSpec::discrete(double alpha, double h, std::int64_t N) {
    OUSpec s;
    s.alpha = alpha;
    s.h = h;
    s.N = N;
    s.T = h * static_cast<double>(N);
    validate_discrete(s);
    return s;
}

OUSpec OUSpec::continuous(double alpha, double T) {
    OUSpec s;
    s.alpha = alpha;
    s.T = T;
    validate_continuous(s);
    return s;
}

GaussianLaw1D ou_discrete_law(const OUSpec& spec, double x) {
    validate_discrete(spec);
    const double s = detail::contraction_gap(spec.h, spec.alpha);
    const double mean = std::pow(1.0 - spec.alpha * spec.h, static_cast<double>(spec.N)) * x;
    return {mean, 2.0 * spec.h * detail::geometric_sum(s, spec.N)};
}

GaussianLaw1D ou_continuous_law(const OUSpec& spec, double x) {
    validate_continuous(spec);
    const double a = spec.alpha;
    const double var = std::abs(a * spec.T) < detail::kLimitBranch ? 2.0 * spec.T
                                                                   : -std::expm1(-2.0 * a * spec.T) / a;
    return {std::exp(-a * spec.T) * x, var};
}

double ou_renyi_constant(const OUSpec& spec, RenyiOrder q, OUMode mode) {
    const double qq = order_value(q);
    if (mode == OUMode::discrete) {
        validate_discrete(spec);
        const double s = detail::contraction_gap(spec.h, spec.alpha);
        // q (1 - L^2) / (4h (L^{-2N} - 1)) = q L^{2N} / (4h sum_{k<N} L^{2k})
        return qq * detail::contraction_power(s, spec.N) /
               (4.0 * spec.h * detail::geometric_sum(s, spec.N));
    }
    validate_continuous(spec);
    const double a = spec.alpha;
    if (std::abs(a * spec.T) < detail::kLimitBranch) return qq / (4.0 * spec.T);
    return a * qq / (2.0 * std::expm1(2.0 * a * spec.T));
}

DivergenceValue ou_renyi_exact(const OUSpec& spec, double x, double y, RenyiOrder q, OUMode mode) {
    const double d = x - y;
    return {ou_renyi_constant(spec, q, mode) * d * d, q};
}

DivergenceValue ou_renyi_exact(const OUSpec& spec, const Vector& x, const Vector& y, RenyiOrder q,
                               OUMode mode) {
    if (x.size() != y.size()) throw std::invalid_argument("ou_renyi_exact: dimension mismatch");
    return {ou_renyi_constant(spec, q, mode) * (x - y).squaredNorm(), q};
}

double finiteness_threshold(double alpha, double sigma2, RenyiOrder q, ThresholdVariant variant) {
    if (q.is_kl() || q.is_infinity() || !(q.value() > 1.0))
        throw std::invalid_argument("finiteness_threshold: requires finite q > 1");
    if (!(sigma2 >= 0.0)) throw std::domain_error("finiteness_threshold: negative variance");
    const double qq = q.value();
    const double k = variant == ThresholdVariant::refined ? (qq - 1.0) : qq * (qq - 1.0);
    const double u = k * alpha * sigma2;
    if (std::abs(alpha) < detail::kLimitBranch) return 0.5 * k * sigma2;
    if (!(1.0 + u > 0.0)) return kInf;
    return std::log1p(u) / (2.0 * alpha);
}

}  // namespace shiftbound
