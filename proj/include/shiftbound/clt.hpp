#pragma once

#include "shiftbound/bounds.hpp"

#include <functional>
#include <stdexcept>

namespace shiftbound::clt {

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Strictly positive 1D density with smooth log.
class DensitySpec {
public:
    enum class Kind { gaussian, logistic, custom };
    using ScalarFn = std::function<double(double)>;

    static DensitySpec gaussian(double variance);
    static DensitySpec logistic(double scale = 1.0);
    static DensitySpec custom(ScalarFn log_density, ScalarFn log_density_grad, ScalarFn log_density_hess,
                              bool mean_zero = true);

    Kind kind() const { return kind_; }
    double parameter() const { return param_; }
    bool mean_zero() const { return mean_zero_; }

    double log_density(double z) const;
    double density(double z) const { return std::exp(log_density(z)); }
    // d/dz log rho and d^2/dz^2 log rho.
    double score(double z) const;
    double log_hess(double z) const;

private:
    Kind kind_ = Kind::gaussian;
    double param_ = 1.0;
    bool mean_zero_ = true;
    ScalarFn log_density_;
    ScalarFn grad_;
    ScalarFn hess_;
};

inline constexpr double kDefaultTol = 1e-10;

// Smallest R = 2^k with tail mass outside [-R, R] below tol / 100.
double working_radius(const DensitySpec& rho, double tol = kDefaultTol);

// Checks unit mass and, for mean-zero densities, zero mean within 1e-8.
void validate(const DensitySpec& rho, double tol = kDefaultTol);

double density_variance(const DensitySpec& rho, double tol = kDefaultTol);

// int (log rho)'^2 rho, cross-checked against -int (log rho)'' rho.
double fisher_information_1d(const DensitySpec& rho, double tol = kDefaultTol);

// KL(Z || Z + v / h) for Z ~ rho.
double one_step_convolution_kl(const DensitySpec& rho, double v, double h, double tol = kDefaultTol);

struct CramerRao {
    double fisher = 0.0;
    double inv_variance = 0.0;
    bool holds = false;
};

CramerRao cramer_rao_check(const DensitySpec& rho, double tol = kDefaultTol);

struct CltReport {
    BoundReport bound;
    // Same form with the inverse variance in place of the Fisher information.
    double covariance_value = 0.0;
};

CltReport clt_regularity(const DensitySpec& rho, double x, double y, double tol = kDefaultTol);

}  // namespace shiftbound::clt
