#include "shiftbound/divergence.hpp"

#include "shiftbound/detail/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace shiftbound {

namespace {

constexpr double kEigenFloor = 1e-14;
constexpr double kSupportFloor = 1e-200;

double spectral_f(double zeta) { return zeta - 1.0 - std::log(zeta); }

void require_finite_order(RenyiOrder q, const char* where) {
    if (q.is_infinity())
        throw std::domain_error(std::string(where) + ": order must be finite");
}

}  // namespace

RenyiOrder RenyiOrder::of(double q) {
    if (!(q > 0.0)) throw std::domain_error("RenyiOrder: q must be positive");
    if (q == 1.0) return kl();
    if (std::isinf(q)) return infinity();
    return RenyiOrder(Kind::finite, q);
}

std::string RenyiOrder::to_string() const {
    switch (kind_) {
        case Kind::kl:
            return "KL";
        case Kind::infinity:
            return "inf";
        default: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", q_);
            return buf;
        }
    }
}

GaussianLaw1D::GaussianLaw1D(double m, double v) : mean(m), variance(v) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("GaussianLaw1D: variance must be positive");
}

GaussianLawND::GaussianLawND(Vector m, Matrix cov) : mean(std::move(m)), covariance(std::move(cov)) {
    if (covariance.rows() != covariance.cols() || covariance.rows() != mean.size())
        throw std::invalid_argument("GaussianLawND: dimension mismatch");
    const double scale = std::max(1.0, covariance.norm());
    if ((covariance - covariance.transpose()).norm() > 1e-12 * scale)
        throw std::invalid_argument("GaussianLawND: covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(covariance, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0))
        throw std::invalid_argument("GaussianLawND: covariance not positive definite");
}

DivergenceValue renyi_gaussian_isotropic(const Vector& x, const Vector& y, double sigma2,
                                         RenyiOrder q) {
    if (!(sigma2 > 0.0)) throw std::domain_error("renyi_gaussian_isotropic: sigma2 must be positive");
    require_finite_order(q, "renyi_gaussian_isotropic");
    if (x.size() != y.size()) throw std::invalid_argument("renyi_gaussian_isotropic: dimension mismatch");
    return {q.value() * (x - y).squaredNorm() / (2.0 * sigma2), q};
}

DivergenceValue renyi_gaussian_1d_full(const GaussianLaw1D& p0, const GaussianLaw1D& p1,
                                       RenyiOrder q) {
    if (q.is_kl()) throw std::invalid_argument("renyi_gaussian_1d_full: q = 1 uses the KL path");
    require_finite_order(q, "renyi_gaussian_1d_full");
    const double qq = q.value();
    const double sq2 = (1.0 - qq) * p0.variance + qq * p1.variance;
    if (!(sq2 > 0.0)) return {kInf, q};
    const double dm = p0.mean - p1.mean;
    const double log_ratio = 0.5 * std::log(sq2) - 0.5 * (1.0 - qq) * std::log(p0.variance) -
                             0.5 * qq * std::log(p1.variance);
    const double v = qq * dm * dm / (2.0 * sq2) + log_ratio / (1.0 - qq);
    return {std::max(0.0, v), q};
}

DivergenceValue kl_gaussian_nd(const GaussianLawND& p0, const GaussianLawND& p1) {
    if (p0.dim() != p1.dim()) throw std::invalid_argument("kl_gaussian_nd: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> es1(p1.covariance);
    const Vector lam1 = es1.eigenvalues();
    if (lam1.minCoeff() < kEigenFloor) throw std::domain_error("kl_gaussian_nd: singular covariance");
    const Matrix inv_sqrt =
        es1.eigenvectors() * lam1.cwiseSqrt().cwiseInverse().asDiagonal() * es1.eigenvectors().transpose();
    Matrix m = inv_sqrt * p0.covariance * inv_sqrt;
    m = 0.5 * (m + m.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    const Vector zeta = es.eigenvalues();
    if (zeta.minCoeff() < kEigenFloor) throw std::domain_error("kl_gaussian_nd: singular covariance");
    double trace_f = 0.0;
    for (Eigen::Index i = 0; i < zeta.size(); ++i) trace_f += spectral_f(zeta[i]);
    const double mean_term = (inv_sqrt * (p0.mean - p1.mean)).squaredNorm();
    return {std::max(0.0, 0.5 * (mean_term + trace_f)), RenyiOrder::kl()};
}

double chi2_mgf(double sigma2, double lambda2) {
    if (!(sigma2 > 0.0) || !(lambda2 > 0.0))
        throw std::domain_error("chi2_mgf: arguments must be positive");
    if (!(lambda2 > 2.0 * sigma2)) return kInf;
    return std::sqrt(lambda2 / (lambda2 - 2.0 * sigma2));
}

double gaussian_square_mgf(double sigma2, double c) {
    if (!(sigma2 >= 0.0)) throw std::domain_error("gaussian_square_mgf: negative variance");
    const double d = 1.0 - 2.0 * c * sigma2;
    if (!(d > 0.0)) return kInf;
    return 1.0 / std::sqrt(d);
}

double dq_rq_transform(double value, RenyiOrder q, TransformDirection direction) {
    if (q.is_kl()) throw std::invalid_argument("dq_rq_transform: q must differ from 1");
    require_finite_order(q, "dq_rq_transform");
    const double qq = q.value();
    if (direction == TransformDirection::forward) {
        if (!(value >= 0.0)) throw std::domain_error("dq_rq_transform: D_q must be nonnegative");
        if (qq > 1.0) return std::log1p(value) / (qq - 1.0);
        if (value >= 1.0) return kInf;
        return std::log1p(-value) / (qq - 1.0);
    }
    if (!(value >= 0.0)) throw std::domain_error("dq_rq_transform: R_q must be nonnegative");
    if (qq > 1.0) return std::expm1((qq - 1.0) * value);
    return -std::expm1((qq - 1.0) * value);
}

double chi2_from_renyi2(double r2) {
    if (!(r2 >= 0.0)) throw std::domain_error("chi2_from_renyi2: negative divergence");
    return std::expm1(r2);
}

namespace {

// Mass of a density outside [-r, r].
double tail_mass(const Density1D& p, double r, double tol) {
    const double right = detail::integrate_tail([&](double z) { return p(z); }, r, tol);
    const double left = detail::integrate_tail([&](double z) { return p(-z); }, r, tol);
    return right + left;
}

double choose_radius(const Density1D& p0, const Density1D& p1, double tol) {
    double r = 1.0;
    while (r < 1e6) {
        if (tail_mass(p0, r, 1e-6) < tol / 10 && tail_mass(p1, r, 1e-6) < tol / 10) return r;
        r *= 2.0;
    }
    throw std::invalid_argument("renyi_numeric_1d: densities have no effective support");
}

}  // namespace

DivergenceValue renyi_numeric_1d(const Density1D& density0, const Density1D& density1,
                                 RenyiOrder q, Interval domain, double tol) {
    auto as_log = [](const Density1D& p) {
        return [&p](double z) {
            const double v = p(z);
            if (v < 0.0) throw std::invalid_argument("renyi_numeric_1d: negative density");
            return v > 0.0 ? std::log(v) : -kInf;
        };
    };
    return renyi_numeric_1d_log(as_log(density0), as_log(density1), q, domain, tol);
}

DivergenceValue renyi_numeric_1d_log(const Density1D& log_density0, const Density1D& log_density1,
                                     RenyiOrder q, Interval domain, double tol) {
    require_finite_order(q, "renyi_numeric_1d");
    if (!(tol > 0.0)) throw std::domain_error("renyi_numeric_1d: tol must be positive");
    const Density1D p0 = [&](double z) { return std::exp(log_density0(z)); };
    const Density1D p1 = [&](double z) { return std::exp(log_density1(z)); };
    const bool auto_lo = std::isinf(domain.lo);
    const bool auto_hi = std::isinf(domain.hi);
    const bool unbounded = auto_lo || auto_hi;
    if (unbounded) {
        const double r = choose_radius(p0, p1, tol);
        domain = {auto_lo ? -r : domain.lo, auto_hi ? r : domain.hi};
    }
    if (!(domain.lo < domain.hi)) throw std::invalid_argument("renyi_numeric_1d: empty domain");

    const double quad_tol = tol * 1e-3;
    for (const Density1D* p : {&p0, &p1}) {
        const double mass = detail::integrate(*p, domain.lo, domain.hi, quad_tol).value;
        if (std::abs(mass - 1.0) > tol)
            throw std::invalid_argument("renyi_numeric_1d: density not normalized on domain");
    }

    const double qq = q.value();
    const double log_floor = std::log(kSupportFloor);
    bool blown = false;
    auto integrand = [&](double z) {
        const double la = log_density0(z);
        const double lb = log_density1(z);
        if (la == -kInf) return 0.0;
        if (lb == -kInf) {
            // Mass where density1 vanishes makes KL and q > 1 infinite.
            if (q.is_kl() || qq > 1.0) blown = blown || la > log_floor;
            return 0.0;
        }
        if (q.is_kl()) return std::exp(la) * (la - lb);
        return std::exp(qq * la + (1.0 - qq) * lb);
    };
    auto evaluate = [&](Interval d) { return detail::integrate(integrand, d.lo, d.hi, quad_tol).value; };

    double integral = evaluate(domain);
    if (blown || !std::isfinite(integral)) return {kInf, q};
    if (unbounded) {
        // Widen until the tilted integrand's mass is captured; persistent growth means divergence.
        bool settled = false;
        for (int k = 0; k < 8 && !settled; ++k) {
            domain = {auto_lo ? 2.0 * domain.lo : domain.lo, auto_hi ? 2.0 * domain.hi : domain.hi};
            const double wider = evaluate(domain);
            if (blown || !std::isfinite(wider)) return {kInf, q};
            settled = std::abs(wider - integral) <= 0.1 * tol * std::max(1.0, std::abs(integral));
            integral = wider;
        }
        if (!settled) return {kInf, q};
    }

    if (q.is_kl()) return {std::max(0.0, integral), q};
    if (!(integral > 0.0)) return {qq < 1.0 ? kInf : 0.0, q};
    return {std::max(0.0, std::log(integral) / (qq - 1.0)), q};
}

}  // namespace shiftbound
