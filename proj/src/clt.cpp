#include "shiftbound/clt.hpp"

#include "shiftbound/detail/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace shiftbound::clt {

namespace {

constexpr double kMomentTol = 1e-8;
constexpr int kMaxDoublings = 40;

double nominal_scale(const DensitySpec& rho) {
    switch (rho.kind()) {
    case DensitySpec::Kind::gaussian: return std::sqrt(rho.parameter());
    case DensitySpec::Kind::logistic: return rho.parameter();
    case DensitySpec::Kind::custom: return 1.0;
    }
    return 1.0;
}

template <class F>
double integrate_checked(F&& f, double a, double b, double tol, const char* what) {
    const auto r = detail::integrate(std::forward<F>(f), a, b, tol);
    if (!std::isfinite(r.value)) throw IntegrationError(std::string(what) + " is not integrable");
    return r.value;
}

}  // namespace

DensitySpec DensitySpec::gaussian(double variance) {
    if (!(variance > 0) || !std::isfinite(variance)) throw std::invalid_argument("variance must be positive");
    DensitySpec d;
    d.kind_ = Kind::gaussian;
    d.param_ = variance;
    return d;
}

DensitySpec DensitySpec::logistic(double scale) {
    if (!(scale > 0) || !std::isfinite(scale)) throw std::invalid_argument("scale must be positive");
    DensitySpec d;
    d.kind_ = Kind::logistic;
    d.param_ = scale;
    return d;
}

DensitySpec DensitySpec::custom(ScalarFn log_density, ScalarFn log_density_grad, ScalarFn log_density_hess,
                                bool mean_zero) {
    if (!log_density || !log_density_grad || !log_density_hess)
        throw std::invalid_argument("custom density needs log density, gradient and Hessian");
    DensitySpec d;
    d.kind_ = Kind::custom;
    d.mean_zero_ = mean_zero;
    d.log_density_ = std::move(log_density);
    d.grad_ = std::move(log_density_grad);
    d.hess_ = std::move(log_density_hess);
    return d;
}

double DensitySpec::log_density(double z) const {
    switch (kind_) {
    case Kind::gaussian: return -0.5 * z * z / param_ - 0.5 * std::log(2 * std::numbers::pi * param_);
    case Kind::logistic: {
        const double a = std::abs(z / param_);
        return -a - 2 * std::log1p(std::exp(-a)) - std::log(param_);
    }
    case Kind::custom: return log_density_(z);
    }
    return 0.0;
}

double DensitySpec::score(double z) const {
    switch (kind_) {
    case Kind::gaussian: return -z / param_;
    case Kind::logistic: return -std::tanh(0.5 * z / param_) / param_;
    case Kind::custom: return grad_(z);
    }
    return 0.0;
}

double DensitySpec::log_hess(double z) const {
    switch (kind_) {
    case Kind::gaussian: return -1.0 / param_;
    case Kind::logistic: {
        const double c = std::cosh(0.5 * z / param_);
        return -0.5 / (param_ * param_ * c * c);
    }
    case Kind::custom: return hess_(z);
    }
    return 0.0;
}

double working_radius(const DensitySpec& rho, double tol) {
    if (!(tol > 0)) throw std::invalid_argument("tol must be positive");
    const auto upper = [&rho](double z) { return rho.density(z); };
    const auto lower = [&rho](double z) { return rho.density(-z); };
    double R = nominal_scale(rho);
    for (int k = 0; k < kMaxDoublings; ++k, R *= 2) {
        const double tail = detail::integrate_tail(upper, R, 1e-8) + detail::integrate_tail(lower, R, 1e-8);
        if (!std::isfinite(tail)) throw IntegrationError("tail mass is not finite");
        if (tail < tol / 100) return R;
    }
    throw IntegrationError("density tails too heavy for a working domain");
}

void validate(const DensitySpec& rho, double tol) {
    const double R = working_radius(rho, tol);
    const double mass = integrate_checked([&](double z) { return rho.density(z); }, -R, R, tol, "density");
    if (std::abs(mass - 1) > kMomentTol) throw std::invalid_argument("density does not integrate to 1");
    if (rho.mean_zero()) {
        const double mean = integrate_checked([&](double z) { return z * rho.density(z); }, -R, R, tol, "mean");
        if (std::abs(mean) > kMomentTol) throw std::invalid_argument("density is not mean zero");
    }
}

double density_variance(const DensitySpec& rho, double tol) {
    switch (rho.kind()) {
    case DensitySpec::Kind::gaussian: return rho.parameter();
    case DensitySpec::Kind::logistic: return rho.parameter() * rho.parameter() * std::numbers::pi * std::numbers::pi / 3;
    case DensitySpec::Kind::custom: break;
    }
    const double R = working_radius(rho, tol);
    const double m1 = integrate_checked([&](double z) { return z * rho.density(z); }, -R, R, tol, "mean");
    const double m2 = integrate_checked([&](double z) { return z * z * rho.density(z); }, -R, R, tol, "variance");
    return m2 - m1 * m1;
}

double fisher_information_1d(const DensitySpec& rho, double tol) {
    const double R = working_radius(rho, tol);
    const double score_form = integrate_checked(
        [&](double z) {
            const double s = rho.score(z);
            return s * s * rho.density(z);
        },
        -R, R, tol, "squared score");
    const double hess_form =
        integrate_checked([&](double z) { return -rho.log_hess(z) * rho.density(z); }, -R, R, tol, "log Hessian");
    if (std::abs(score_form - hess_form) > 10 * tol * std::max(1.0, std::abs(score_form)))
        throw IntegrationError("score and Hessian forms of the Fisher information disagree");
    if (!(score_form > 0)) throw IntegrationError("Fisher information is not positive");
    return score_form;
}

double one_step_convolution_kl(const DensitySpec& rho, double v, double h, double tol) {
    if (!(h > 0) || !std::isfinite(h) || !std::isfinite(v)) throw std::invalid_argument("need h > 0 and finite v");
    const double s = v / h;
    if (s == 0) return 0.0;
    const double R = working_radius(rho, tol);
    if (std::abs(s) > R) throw std::invalid_argument("shift lies outside the working domain");
    const double kl = integrate_checked(
        [&](double z) { return rho.density(z) * (rho.log_density(z) - rho.log_density(z - s)); }, -R, R, tol,
        "log density ratio");
    return std::max(kl, 0.0);
}

CramerRao cramer_rao_check(const DensitySpec& rho, double tol) {
    CramerRao r;
    r.fisher = fisher_information_1d(rho, tol);
    r.inv_variance = 1.0 / density_variance(rho, tol);
    r.holds = r.fisher >= r.inv_variance - tol;
    return r;
}

CltReport clt_regularity(const DensitySpec& rho, double x, double y, double tol) {
    const double fisher = fisher_information_1d(rho, tol);
    CltReport r;
    r.bound = clt_bound(Matrix::Constant(1, 1, fisher), Vector::Constant(1, x), Vector::Constant(1, y));
    r.covariance_value = 0.5 * (x - y) * (x - y) / density_variance(rho, tol);
    return r;
}

}  // namespace shiftbound::clt
