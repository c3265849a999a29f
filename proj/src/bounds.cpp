#include "shiftbound/bounds.hpp"

#include "shiftbound/detail/geometric.hpp"
#include "shiftbound/detail/summation.hpp"
#include "shiftbound/shift_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace shiftbound {

namespace {

void require_finite_order(RenyiOrder q) {
    if (q.is_infinity()) throw std::domain_error("bound requires a finite Renyi order");
}

double squared_norm(const Vector& x, const Vector& y) { return (x - y).squaredNorm(); }

double empirical_mean(const std::vector<double>& v) {
    detail::CompensatedSum s;
    for (double x : v) s.add(x);
    return s.value() / static_cast<double>(v.size());
}

// log of the empirical mean of exp(v_i).
double log_mean_exp(const std::vector<double>& v) {
    return detail::log_sum_exp(v) - std::log(static_cast<double>(v.size()));
}

BoundReport make_report(RenyiOrder q, double constant, CostKind kind, std::string tag, double value) {
    BoundReport r;
    r.order = q;
    r.constant = constant;
    r.cost_kind = kind;
    r.theorem_tag = std::move(tag);
    r.value = value;
    r.finite = std::isfinite(value);
    return r;
}

// Bound built from the Dirac estimate R_q <= q K |x - y|^2 (K |x - y|^2 for KL).
BoundReport quadratic_regularity(double K, RenyiOrder q, const CouplingCost& cost, const std::string& tag) {
    require_finite_order(q);
    const double coef = q.is_kl() ? K : q.value() * K;
    if (const auto* d = std::get_if<SquaredDistance>(&cost)) {
        if (d->value < 0) throw std::invalid_argument("squared distance must be nonnegative");
        return make_report(q, coef, CostKind::sq_dist, tag, d->value == 0.0 ? 0.0 : coef * d->value);
    }
    if (const auto* g = std::get_if<GaussianOffset>(&cost)) {
        if (!(g->variance >= 0) || g->dim < 1) throw std::invalid_argument("invalid Gaussian offset");
        if (q.is_kl()) return make_report(q, coef, CostKind::w2_sq, tag, coef * g->variance * g->dim);
        const double qv = q.value();
        const double mgf = gaussian_square_mgf(g->variance, (qv - 1.0) * coef);
        const double value = mgf == kInf ? kInf : g->dim * std::log(mgf) / (qv - 1.0);
        return make_report(q, coef, CostKind::exp_coupling, tag, value);
    }
    const auto& sample = std::get<CouplingSample>(cost);
    sample.validate();
    std::vector<double> d2(sample.pairs.size());
    std::transform(sample.pairs.begin(), sample.pairs.end(), d2.begin(),
                   [](const auto& p) { return squared_norm(p.first, p.second); });
    if (q.is_kl()) return make_report(q, coef, CostKind::w2_sq, tag, coef * empirical_mean(d2));
    const double qv = q.value();
    for (double& v : d2) v *= (qv - 1.0) * coef;
    return make_report(q, coef, CostKind::exp_coupling, tag, log_mean_exp(d2) / (qv - 1.0));
}

// (1 - L^2) / (4 h (L^{-2N} - 1)) written through s = 1 - L^2.
double langevin_rate(double s, double h, std::int64_t N) {
    return detail::contraction_power(s, N) / (4.0 * h * detail::geometric_sum(s, N));
}

// Key for grouping pairs by an exact coordinate value.
std::vector<double> as_key(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

KernelSpec KernelSpec::abstract_kernel(double c, double L) {
    if (!(c >= 0) || !(L >= 0)) throw std::invalid_argument("kernel constants must be nonnegative");
    KernelSpec k;
    k.kind = KernelKind::abstract;
    k.c = c;
    k.L = L;
    return k;
}

KernelSpec KernelSpec::langevin_euler(double alpha, double beta, double h) {
    if (!(h > 0)) throw std::invalid_argument("step size must be positive");
    if (!(beta >= alpha)) throw std::invalid_argument("beta must be at least alpha");
    KernelSpec k;
    k.kind = KernelKind::langevin_euler;
    k.h = h;
    k.alpha = alpha;
    k.beta = beta;
    k.L = std::max(std::abs(1.0 - h * alpha), std::abs(1.0 - h * beta));
    k.c = k.L * k.L / (4.0 * h);
    return k;
}

KernelSpec KernelSpec::ito_euler(double alpha, double beta, double lambda, double Lambda, double h) {
    if (!(h > 0)) throw std::invalid_argument("step size must be positive");
    if (!(beta >= alpha)) throw std::invalid_argument("beta must be at least alpha");
    if (!(lambda > 0) || !(Lambda >= lambda)) throw std::invalid_argument("need 0 < lambda <= Lambda");
    KernelSpec k;
    k.kind = KernelKind::ito_euler;
    k.h = h;
    k.alpha = alpha;
    k.beta = beta;
    k.lambda = lambda;
    k.Lambda = Lambda;
    const double L2 = 1.0 - 2.0 * alpha * h + beta * beta * h * h;
    if (!(L2 > 0)) throw std::domain_error("step size too large: L^2 <= 0");
    k.L = std::sqrt(L2);
    const double r = Lambda / lambda;
    k.c = (L2 + 4.0 * (beta - alpha) * r * r * r * h) / (2.0 * lambda * h);
    return k;
}

double KernelSpec::one_step_constant(RenyiOrder q) const {
    require_finite_order(q);
    if (kind == KernelKind::langevin_euler) return q.is_kl() ? c : q.value() * c;
    return c;
}

double KernelSpec::contraction_gap() const {
    switch (kind) {
    case KernelKind::langevin_euler:
        return std::min(detail::contraction_gap(h, alpha), detail::contraction_gap(h, beta));
    case KernelKind::ito_euler:
        return 2.0 * alpha * h - beta * beta * h * h;
    default:
        return 1.0 - L * L;
    }
}

const char* to_string(CostKind k) {
    switch (k) {
    case CostKind::sq_dist: return "sq_dist";
    case CostKind::w2_sq: return "w2_sq";
    case CostKind::exp_coupling: return "exp_coupling";
    case CostKind::refined_1: return "refined_1";
    case CostKind::refined_2: return "refined_2";
    }
    return "unknown";
}

void CouplingSample::validate() const {
    if (pairs.empty()) throw std::invalid_argument("coupling sample is empty");
    const auto d = pairs.front().first.size();
    for (const auto& [x, y] : pairs)
        if (x.size() != d || y.size() != d) throw std::invalid_argument("coupling dimensions differ");
}

CouplingSample CouplingSample::from_1d(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("coupling marginals differ in size");
    CouplingSample c;
    c.pairs.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        c.pairs.emplace_back(Vector::Constant(1, xs[i]), Vector::Constant(1, ys[i]));
    return c;
}

CouplingSample quantile_coupling(std::vector<double> xs, std::vector<double> ys) {
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    return CouplingSample::from_1d(xs, ys);
}

CouplingSample independent_coupling(const std::vector<double>& xs, std::vector<double> ys, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::shuffle(ys.begin(), ys.end(), rng);
    return CouplingSample::from_1d(xs, ys);
}

BoundReport multi_step_bound(const KernelSpec& kernel, std::int64_t N, RenyiOrder q, double sq_dist) {
    if (N < 1) throw std::invalid_argument("N must be positive");
    if (sq_dist < 0) throw std::invalid_argument("squared distance must be nonnegative");
    const double constant = kernel.one_step_constant(q) * shift_ratio(N - 1, kernel.L);
    return make_report(q, constant, CostKind::sq_dist, "multi_step_regularity",
                       sq_dist == 0.0 ? 0.0 : constant * sq_dist);
}

BoundReport langevin_discrete_bound(const KernelSpec& kernel, std::int64_t N, RenyiOrder q, const CouplingCost& cost) {
    if (kernel.kind != KernelKind::langevin_euler) throw std::invalid_argument("expected a Langevin Euler kernel");
    if (N < 1) throw std::invalid_argument("N must be positive");
    const double K = langevin_rate(kernel.contraction_gap(), kernel.h, N);
    return quadratic_regularity(K, q, cost, "langevin_discrete");
}

BoundReport langevin_continuous_bound(double alpha, double T, RenyiOrder q, const CouplingCost& cost) {
    if (!(T > 0)) throw std::invalid_argument("T must be positive");
    const double K = std::abs(alpha * T) < detail::kLimitBranch ? 1.0 / (4.0 * T)
                                                                 : alpha / (2.0 * std::expm1(2.0 * alpha * T));
    return quadratic_regularity(K, q, cost, "langevin_continuous");
}

BoundReport convexity_lift(const PointwiseRho& rho, RenyiOrder q, const CouplingSample& coupling) {
    require_finite_order(q);
    coupling.validate();
    std::vector<double> r(coupling.pairs.size());
    std::transform(coupling.pairs.begin(), coupling.pairs.end(), r.begin(),
                   [&](const auto& p) { return rho(p.first, p.second); });
    if (q.is_kl()) return make_report(q, 1.0, CostKind::w2_sq, "convexity_principle", empirical_mean(r));
    const double qv = q.value();
    for (double& v : r) v *= qv - 1.0;
    return make_report(q, 1.0, CostKind::exp_coupling, "convexity_principle", log_mean_exp(r) / (qv - 1.0));
}

BoundReport refined_renyi_bound(const PointwiseRho& rho, RenyiOrder q, const CouplingSample& coupling,
                                RefinedVariant variant) {
    if (q.is_kl() || q.is_infinity() || !(q.value() > 1)) throw std::invalid_argument("refined bounds need 1 < q < inf");
    coupling.validate();
    const double qv = q.value();
    const bool first = variant == RefinedVariant::first;
    std::map<std::vector<double>, std::vector<double>> groups;
    for (const auto& [x, y] : coupling.pairs) groups[as_key(first ? y : x)].push_back(rho(x, y));
    const double n = static_cast<double>(coupling.pairs.size());
    std::vector<double> terms;
    terms.reserve(groups.size());
    for (const auto& [key, r] : groups) {
        const double weight = std::log(static_cast<double>(r.size()) / n);
        if (first) {
            std::vector<double> e(r.size());
            std::transform(r.begin(), r.end(), e.begin(), [&](double v) { return (qv - 1.0) / qv * v; });
            terms.push_back(weight + qv * log_mean_exp(e));
        } else {
            terms.push_back(weight + (qv - 1.0) * empirical_mean(r));
        }
    }
    return make_report(q, 1.0, first ? CostKind::refined_1 : CostKind::refined_2, "refined_renyi",
                       detail::log_sum_exp(terms) / (qv - 1.0));
}

BoundReport refined_renyi_bound(double rho_coef, RenyiOrder q, const GaussianOffset& offset, RefinedVariant variant) {
    if (q.is_kl() || q.is_infinity() || !(q.value() > 1)) throw std::invalid_argument("refined bounds need 1 < q < inf");
    if (!(offset.variance >= 0) || offset.dim < 1) throw std::invalid_argument("invalid Gaussian offset");
    const double qv = q.value();
    const bool first = variant == RefinedVariant::first;
    const double c = first ? (qv - 1.0) / qv * rho_coef : (qv - 1.0) * rho_coef;
    const double mgf = gaussian_square_mgf(offset.variance, c);
    double value = kInf;
    if (mgf < kInf) value = (first ? qv : 1.0) * offset.dim * std::log(mgf) / (qv - 1.0);
    return make_report(q, rho_coef, first ? CostKind::refined_1 : CostKind::refined_2, "refined_renyi", value);
}

BoundReport mult_noise_bound(const KernelSpec& kernel, std::int64_t N, double sq_dist) {
    if (kernel.kind != KernelKind::ito_euler) throw std::invalid_argument("expected an Ito Euler kernel");
    if (N < 1) throw std::invalid_argument("N must be positive");
    if (sq_dist < 0) throw std::invalid_argument("squared distance must be nonnegative");
    const double s = kernel.contraction_gap();
    if (!(s < 1)) throw std::domain_error("step size too large: L^2 <= 0");
    const double L2 = 1.0 - s;
    const double r = kernel.Lambda / kernel.lambda;
    const double pre = 1.0 + 4.0 * (kernel.beta - kernel.alpha) * r * r * r * kernel.h / L2;
    // L^{-2N} - 1
    const double denom = std::expm1(-static_cast<double>(N) * std::log1p(-s));
    const double constant = pre * kernel.alpha * (1.0 - kernel.beta * kernel.h / 2.0) / (kernel.lambda * denom);
    if (!(constant >= 0) || !std::isfinite(constant))
        return make_report(RenyiOrder::kl(), kInf, CostKind::sq_dist, "multiplicative_noise", kInf);
    return make_report(RenyiOrder::kl(), constant, CostKind::sq_dist, "multiplicative_noise",
                       sq_dist == 0.0 ? 0.0 : constant * sq_dist);
}

BoundReport clt_bound(const Matrix& fisher_info, const Vector& x, const Vector& y) {
    if (fisher_info.rows() != fisher_info.cols() || fisher_info.rows() != x.size() || x.size() != y.size())
        throw std::invalid_argument("dimension mismatch");
    const double scale = std::max(1.0, fisher_info.cwiseAbs().maxCoeff());
    if ((fisher_info - fisher_info.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("Fisher information must be symmetric");
    const Eigen::SelfAdjointEigenSolver<Matrix> es(fisher_info, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12 * scale)
        throw std::invalid_argument("Fisher information must be positive semidefinite");
    const Vector d = y - x;
    return make_report(RenyiOrder::kl(), 0.5, CostKind::sq_dist, "clt_regularity", 0.5 * d.dot(fisher_info * d));
}

RenyiOrder weak_triangle_compose(RenyiOrder q0, RenyiOrder q1) {
    for (const auto& q : {q0, q1})
        if (q.is_kl() || q.is_infinity() || !(q.value() > 1)) throw std::invalid_argument("composition needs 1 < q < inf");
    const double a = q0.value(), b = q1.value();
    return RenyiOrder::of(a * b / (a + b - 1.0));
}

BoundReport compose_order_bound(RenyiOrder q0, RenyiOrder q1, double C, double sq_dist) {
    const RenyiOrder q = weak_triangle_compose(q0, q1);
    if (!(C >= 0) || !(sq_dist >= 0)) throw std::invalid_argument("constants must be nonnegative");
    const double a = q0.value(), b = q1.value();
    const double t = (b - 1.0) / (a + b - 1.0);
    const double leg0 = C * a * t * t * sq_dist;
    const double leg1 = C * b * (1.0 - t) * (1.0 - t) * sq_dist;
    return make_report(q, C * q.value(), CostKind::sq_dist, "weak_triangle", b / (b - 1.0) * leg0 + leg1);
}

double shifted_composition_specialize(const std::vector<ShiftedStep>& steps, double prior_div) {
    if (!(prior_div >= 0)) throw std::invalid_argument("prior divergence must be nonnegative");
    detail::CompensatedSum s;
    s.add(prior_div);
    for (const auto& st : steps) {
        if (!(st.dist_to_shifted >= 0) || !(st.one_step_c >= 0)) throw std::invalid_argument("entries must be nonnegative");
        s.add(st.one_step_c * st.dist_to_shifted * st.dist_to_shifted);
    }
    return s.value();
}

}  // namespace shiftbound
