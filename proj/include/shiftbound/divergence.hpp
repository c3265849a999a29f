#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>

namespace shiftbound {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Order of a Renyi divergence. KL and the sup-divergence are symbolic.
class RenyiOrder {
public:
    enum class Kind { finite, kl, infinity };

    static RenyiOrder of(double q);
    static RenyiOrder kl() { return RenyiOrder(Kind::kl, 1.0); }
    static RenyiOrder infinity() { return RenyiOrder(Kind::infinity, kInf); }

    Kind kind() const { return kind_; }
    bool is_kl() const { return kind_ == Kind::kl; }
    bool is_infinity() const { return kind_ == Kind::infinity; }

    // Numeric value of q; 1 for KL, +inf for the sup-divergence.
    double value() const { return q_; }

    std::string to_string() const;

    friend bool operator==(const RenyiOrder&, const RenyiOrder&) = default;

private:
    RenyiOrder(Kind k, double q) : kind_(k), q_(q) {}
    Kind kind_;
    double q_;
};

struct GaussianLaw1D {
    double mean;
    double variance;

    GaussianLaw1D(double m, double v);
};

struct GaussianLawND {
    Vector mean;
    Matrix covariance;

    GaussianLawND(Vector m, Matrix cov);
    Eigen::Index dim() const { return mean.size(); }
};

struct DivergenceValue {
    double value;
    RenyiOrder order;

    bool finite() const { return value < kInf; }
};

DivergenceValue renyi_gaussian_isotropic(const Vector& x, const Vector& y, double sigma2,
                                         RenyiOrder q);

DivergenceValue renyi_gaussian_1d_full(const GaussianLaw1D& p0, const GaussianLaw1D& p1,
                                       RenyiOrder q);

DivergenceValue kl_gaussian_nd(const GaussianLawND& p0, const GaussianLawND& p1);

// E exp(Z^2 / lambda2) for Z ~ N(0, sigma2).
double chi2_mgf(double sigma2, double lambda2);

// E exp(c Z^2) for Z ~ N(0, sigma2) and any real c; +inf when it diverges.
double gaussian_square_mgf(double sigma2, double c);

enum class TransformDirection { forward, inverse };

// forward maps D_q to R_q, inverse maps R_q to D_q.
double dq_rq_transform(double value, RenyiOrder q, TransformDirection direction);

// Chi-squared divergence from the order-2 Renyi divergence.
double chi2_from_renyi2(double r2);

struct Interval {
    double lo;
    double hi;
};

using Density1D = std::function<double(double)>;

DivergenceValue renyi_numeric_1d(const Density1D& density0, const Density1D& density1,
                                 RenyiOrder q, Interval domain, double tol = 1e-9);

// Same oracle from log-densities; avoids tail underflow for strongly tilted integrands.
DivergenceValue renyi_numeric_1d_log(const Density1D& log_density0, const Density1D& log_density1,
                                     RenyiOrder q, Interval domain, double tol = 1e-9);

}  // namespace shiftbound
