#include "shiftbound/harnack.hpp"

#include "shiftbound/detail/quadrature.hpp"
#include "shiftbound/detail/summation.hpp"
#include "shiftbound/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace shiftbound::harnack {

namespace {

// Relative floating resolution used as slack for exact evaluations.
constexpr double kExactSlack = 1e-12;
// Standardized half-width of the Gaussian integration window.
constexpr double kWindow = 40.0;

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// E g(Z) for Z ~ law, split at the kinks of g.
double gauss_expect(const GaussianLaw1D& law, const std::function<double(double)>& g, const std::vector<double>& kinks) {
    const double s = std::sqrt(law.variance);
    std::vector<double> cuts{-kWindow, kWindow};
    for (double k : kinks) {
        const double z = (k - law.mean) / s;
        if (z > -kWindow && z < kWindow) cuts.push_back(z);
    }
    std::sort(cuts.begin(), cuts.end());
    detail::CompensatedSum total;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        total.add(detail::integrate([&](double z) { return g(law.mean + s * z) * std_normal_pdf(z); }, cuts[i], cuts[i + 1],
                                    1e-14).value);
    }
    return total.value();
}

struct Estimate {
    double mean;
    double se;
};

Estimate sample_mean(const std::vector<double>& xs, const std::function<double(double)>& g) {
    if (xs.size() < 2) throw std::invalid_argument("need at least two samples");
    detail::CompensatedSum s;
    std::vector<double> v(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        v[i] = g(xs[i]);
        s.add(v[i]);
    }
    const double n = static_cast<double>(xs.size());
    const double m = s.value() / n;
    detail::CompensatedSum d;
    for (double x : v) d.add((x - m) * (x - m));
    return {m, std::sqrt(d.value() / (n - 1.0) / n)};
}

void require_positive(double v) {
    if (!(v > 0)) throw std::invalid_argument("test function must be positive");
}

void require_nonnegative(double v) {
    if (!(v >= 0)) throw std::invalid_argument("test function must be nonnegative");
}

// Kinds whose sign is not controlled cannot enter power, log or reverse inequalities.
void require_sign_controlled(const TestFunction& f, bool strict) {
    if (f.kind == TestFunction::Kind::linear && f.b != 0.0) throw std::invalid_argument("linear test function changes sign");
    if (f.kind == TestFunction::Kind::linear) (strict ? require_positive : require_nonnegative)(f.a);
    if (f.kind == TestFunction::Kind::quadratic_clipped) {
        if (strict && !(f.lo > 0)) throw std::invalid_argument("clipped quadratic needs a positive floor");
        if (!strict && !(f.lo >= 0)) throw std::invalid_argument("clipped quadratic needs a nonnegative floor");
    }
    if (strict && f.kind == TestFunction::Kind::indicator_halfspace) throw std::invalid_argument("indicator is not positive");
}

// E f^s under a Gaussian law.
double gauss_power(const GaussianLaw1D& law, const TestFunction& f, double s, bool strict) {
    if (f.kind == TestFunction::Kind::exp_affine)
        return std::exp(s * (f.a * law.mean + f.b) + 0.5 * s * s * f.a * f.a * law.variance);
    return gauss_expect(law, [&](double z) {
        const double v = f(z);
        strict ? require_positive(v) : require_nonnegative(v);
        return s == 1.0 ? v : std::pow(v, s);
    }, f.kinks());
}

double gauss_log(const GaussianLaw1D& law, const TestFunction& f) {
    if (f.kind == TestFunction::Kind::exp_affine) return f.a * law.mean + f.b;
    return gauss_expect(law, [&](double z) {
        const double v = f(z);
        require_positive(v);
        return std::log(v);
    }, f.kinks());
}

std::function<double(double)> power_of(const TestFunction& f, double s, bool strict) {
    return [&f, s, strict](double z) {
        const double v = f(z);
        strict ? require_positive(v) : require_nonnegative(v);
        return s == 1.0 ? v : std::pow(v, s);
    };
}

CheckResult finish(std::string name, double lhs, double rhs, double slack, double se, bool upper) {
    CheckResult r;
    r.inequality = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = slack;
    r.se = se;
    r.gap = upper ? rhs - lhs : lhs - rhs;
    r.holds = r.gap >= -slack;
    return r;
}

double order_of(double p) { return p / (p - 1.0); }

void require_order(const BoundReport& b, double q) {
    if (b.order.is_infinity() || std::abs(b.order.value() - q) > 1e-12 * q)
        throw std::invalid_argument("bound order " + b.order.to_string() + " does not match the Harnack exponent");
}

}  // namespace

HarnackConstant power_harnack_constant(const BoundReport& renyi_bound, double p) {
    if (!(p > 1)) throw std::invalid_argument("power Harnack needs p > 1");
    const double q = order_of(p);
    require_order(renyi_bound, q);
    return {HarnackConstant::Kind::power, p, std::exp((q - 1.0) / q * renyi_bound.value), renyi_bound.theorem_tag};
}

HarnackConstant log_harnack_constant(const BoundReport& kl_bound) {
    if (!kl_bound.order.is_kl()) throw std::invalid_argument("log Harnack needs a KL bound");
    return {HarnackConstant::Kind::log, kInf, kl_bound.value, kl_bound.theorem_tag};
}

HarnackConstant reverse_harnack_constant(const BoundReport& renyi_bound, double p) {
    if (!(p < 0)) throw std::invalid_argument("reverse Harnack needs p < 0");
    require_order(renyi_bound, order_of(p));
    return {HarnackConstant::Kind::reverse, p, std::exp(-renyi_bound.value / std::abs(p)), renyi_bound.theorem_tag};
}

TestFunction TestFunction::linear(double a, double b) {
    TestFunction f;
    f.kind = Kind::linear;
    f.a = a;
    f.b = b;
    return f;
}

TestFunction TestFunction::quadratic_clipped(double a, double b, double c, double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("clip bounds are reversed");
    TestFunction f;
    f.kind = Kind::quadratic_clipped;
    f.a = a;
    f.b = b;
    f.c = c;
    f.lo = lo;
    f.hi = hi;
    return f;
}

TestFunction TestFunction::exp_affine(double a, double b) {
    TestFunction f;
    f.kind = Kind::exp_affine;
    f.a = a;
    f.b = b;
    return f;
}

TestFunction TestFunction::indicator_halfspace(double a) {
    TestFunction f;
    f.kind = Kind::indicator_halfspace;
    f.a = a;
    return f;
}

TestFunction TestFunction::custom(std::function<double(double)> fn) {
    if (!fn) throw std::invalid_argument("test function callable is empty");
    TestFunction f;
    f.kind = Kind::custom;
    f.fn = std::move(fn);
    return f;
}

double TestFunction::operator()(double z) const {
    switch (kind) {
    case Kind::linear: return a + b * z;
    case Kind::quadratic_clipped: return std::clamp(a + b * z + c * z * z, lo, hi);
    case Kind::exp_affine: return std::exp(a * z + b);
    case Kind::indicator_halfspace: return z >= a ? 1.0 : 0.0;
    case Kind::custom: return fn(z);
    }
    return 0.0;
}

std::vector<double> TestFunction::kinks() const {
    std::vector<double> out;
    if (kind == Kind::indicator_halfspace) out.push_back(a);
    if (kind == Kind::quadratic_clipped) {
        for (double level : {lo, hi}) {
            if (!std::isfinite(level)) continue;
            // Roots of c z^2 + b z + (a - level).
            if (c == 0.0) {
                if (b != 0.0) out.push_back((level - a) / b);
                continue;
            }
            const double disc = b * b - 4.0 * c * (a - level);
            if (disc < 0) continue;
            const double sq = std::sqrt(disc);
            out.push_back((-b - sq) / (2.0 * c));
            out.push_back((-b + sq) / (2.0 * c));
        }
    }
    return out;
}

GaussianOutputs ou_outputs(const OUSpec& spec, OUMode mode, double x, double y) {
    if (mode == OUMode::discrete) return {ou_discrete_law(spec, x), ou_discrete_law(spec, y)};
    return {ou_continuous_law(spec, x), ou_continuous_law(spec, y)};
}

namespace {

std::vector<double> first_coordinates(const sim::TrajectoryBatch& b) {
    std::vector<double> out(b.final_states.size());
    std::transform(b.final_states.begin(), b.final_states.end(), out.begin(), [](const Vector& v) { return v[0]; });
    return out;
}

sim::SimOptions options_for(std::uint64_t seed, std::int64_t n_paths) {
    sim::SimOptions o;
    o.seed = seed;
    o.n_paths = n_paths;
    return o;
}

}  // namespace

SampleOutputs sample_outputs(const sim::PotentialSpec& potential, double h, std::int64_t steps, double x, double y,
                             std::uint64_t seed, std::int64_t n_paths) {
    if (potential.dim() != 1) throw std::invalid_argument("Harnack sampling is one-dimensional");
    const auto a = sim::euler_maruyama(potential, h, steps, Vector::Constant(1, x), options_for(seed, n_paths));
    const auto b = sim::euler_maruyama(potential, h, steps, Vector::Constant(1, y), options_for(rng::splitmix64(seed), n_paths));
    return {first_coordinates(a), first_coordinates(b)};
}

SampleOutputs sample_outputs(const sim::ItoSpec& spec, double h, std::int64_t steps, double x, double y,
                             std::uint64_t seed, std::int64_t n_paths) {
    if (spec.dim != 1) throw std::invalid_argument("Harnack sampling is one-dimensional");
    const auto a = sim::ito_euler_maruyama(spec, h, steps, Vector::Constant(1, x), options_for(seed, n_paths));
    const auto b = sim::ito_euler_maruyama(spec, h, steps, Vector::Constant(1, y), options_for(rng::splitmix64(seed), n_paths));
    return {first_coordinates(a), first_coordinates(b)};
}

namespace {

// r^kappa with log r(z) = log N(z; m0, v) - log N(z; m1, v).
TestFunction density_ratio_power(const GaussianOutputs& out, double kappa) {
    const double v = out.mu.variance;
    if (std::abs(out.nu.variance - v) > 1e-12 * v) throw std::invalid_argument("extremizers need equal variances");
    const double m0 = out.mu.mean, m1 = out.nu.mean;
    return TestFunction::exp_affine(kappa * (m0 - m1) / v, -kappa * (m0 * m0 - m1 * m1) / (2.0 * v));
}

}  // namespace

TestFunction power_extremizer(const GaussianOutputs& out, double p) {
    if (!(p > 1)) throw std::invalid_argument("power Harnack needs p > 1");
    return density_ratio_power(out, 1.0 / (p - 1.0));
}

TestFunction log_extremizer(const GaussianOutputs& out) { return density_ratio_power(out, 1.0); }

TestFunction reverse_extremizer(const GaussianOutputs& out, double p) {
    if (!(p < 0)) throw std::invalid_argument("reverse Harnack needs p < 0");
    return density_ratio_power(out, 1.0 / (p - 1.0));
}

double CheckResult::rel_gap() const {
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    return scale > 0 ? gap / scale : 0.0;
}

CheckResult check_power_harnack(const KernelOutputs& out, const TestFunction& f, const HarnackConstant& c) {
    if (c.kind != HarnackConstant::Kind::power) throw std::invalid_argument("expected a power Harnack constant");
    require_sign_controlled(f, false);
    const double p = c.p;
    const double Cp = std::pow(c.constant, p);
    if (const auto* g = std::get_if<GaussianOutputs>(&out)) {
        const double lhs = std::pow(gauss_power(g->mu, f, 1.0, false), p);
        const double rhs = gauss_power(g->nu, f, p, false) * Cp;
        return finish("power_harnack", lhs, rhs, kExactSlack * std::abs(rhs), 0.0, true);
    }
    const auto& s = std::get<SampleOutputs>(out);
    const auto m1 = sample_mean(s.mu, power_of(f, 1.0, false));
    const auto mp = sample_mean(s.nu, power_of(f, p, false));
    const double se = std::hypot(p * std::pow(m1.mean, p - 1.0) * m1.se, Cp * mp.se);
    return finish("power_harnack", std::pow(m1.mean, p), mp.mean * Cp, kSeSlack * se, se, true);
}

CheckResult check_log_harnack(const KernelOutputs& out, const TestFunction& f, const HarnackConstant& c) {
    if (c.kind != HarnackConstant::Kind::log) throw std::invalid_argument("expected a log Harnack constant");
    require_sign_controlled(f, true);
    if (const auto* g = std::get_if<GaussianOutputs>(&out)) {
        const double lhs = gauss_log(g->mu, f);
        const double rhs = std::log(gauss_power(g->nu, f, 1.0, true)) + c.constant;
        // log of a unit-scale expectation carries absolute rounding error.
        const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
        return finish("log_harnack", lhs, rhs, kExactSlack * scale, 0.0, true);
    }
    const auto& s = std::get<SampleOutputs>(out);
    const auto ml = sample_mean(s.mu, [&f](double z) {
        const double v = f(z);
        require_positive(v);
        return std::log(v);
    });
    const auto mf = sample_mean(s.nu, power_of(f, 1.0, true));
    const double se = std::hypot(ml.se, mf.se / mf.mean);
    return finish("log_harnack", ml.mean, std::log(mf.mean) + c.constant, kSeSlack * se, se, true);
}

CheckResult check_reverse_harnack(const KernelOutputs& out, const TestFunction& f, const HarnackConstant& c) {
    if (c.kind != HarnackConstant::Kind::reverse) throw std::invalid_argument("expected a reverse Harnack constant");
    require_sign_controlled(f, true);
    const double p = c.p;
    if (const auto* g = std::get_if<GaussianOutputs>(&out)) {
        const double lhs = gauss_power(g->mu, f, 1.0, true);
        const double rhs = std::pow(gauss_power(g->nu, f, p, true), 1.0 / p) * c.constant;
        return finish("reverse_harnack", lhs, rhs, kExactSlack * std::abs(lhs), 0.0, false);
    }
    const auto& s = std::get<SampleOutputs>(out);
    const auto m1 = sample_mean(s.mu, power_of(f, 1.0, true));
    const auto mp = sample_mean(s.nu, power_of(f, p, true));
    const double rhs = std::pow(mp.mean, 1.0 / p) * c.constant;
    const double se = std::hypot(m1.se, std::abs(rhs / (p * mp.mean)) * mp.se);
    return finish("reverse_harnack", m1.mean, rhs, kSeSlack * se, se, false);
}

CheckResult check_local_poincare(const OUSpec& ou, const TestFunction& f, double x) {
    double b = 0.0, c = 0.0;
    if (f.kind == TestFunction::Kind::linear) {
        b = f.b;
    } else if (f.kind == TestFunction::Kind::quadratic_clipped && std::isinf(f.lo) && std::isinf(f.hi)) {
        b = f.b;
        c = f.c;
    } else {
        throw std::invalid_argument("local Poincare check needs an unclipped polynomial of degree <= 2");
    }
    const auto law = ou_continuous_law(ou, x);
    const double m = law.mean, v = law.variance;
    const double slope = b + 2.0 * c * m;
    const double variance_side = slope * slope * v + 2.0 * c * c * v * v;
    const double at = ou.alpha * ou.T;
    const double factor = std::abs(at) < 1e-12 ? 2.0 * ou.T : std::expm1(2.0 * at) / ou.alpha;
    const double grad = std::exp(-at) * slope;
    const double gradient_side = factor * grad * grad;
    return finish("local_poincare", variance_side, gradient_side, kExactSlack * variance_side, 0.0, false);
}

double donsker_varadhan(const KernelOutputs& out, const TestFunction& f) {
    if (const auto* g = std::get_if<GaussianOutputs>(&out)) {
        if (f.kind == TestFunction::Kind::linear)
            return f.b * (g->mu.mean - g->nu.mean) - 0.5 * f.b * f.b * g->nu.variance;
        const double e = gauss_expect(g->mu, [&f](double z) { return f(z); }, f.kinks());
        return e - std::log(gauss_expect(g->nu, [&f](double z) { return std::exp(f(z)); }, f.kinks()));
    }
    const auto& s = std::get<SampleOutputs>(out);
    const auto e = sample_mean(s.mu, [&f](double z) { return f(z); });
    const auto z = sample_mean(s.nu, [&f](double v) { return std::exp(f(v)); });
    return e.mean - std::log(z.mean);
}

DistributionalResult distributional_harnack(const CouplingSample& coupling, const GaussianKernel& kernel,
                                            const TestFunction& f, double p, const PointwiseRho& rho_q,
                                            const PointwiseRho& rho_kl) {
    if (!(p > 1)) throw std::invalid_argument("distributional Harnack needs p > 1");
    coupling.validate();
    if (coupling.pairs.front().first.size() != 1) throw std::invalid_argument("distributional Harnack is one-dimensional");
    require_sign_controlled(f, false);
    const double q = order_of(p);
    const auto order = RenyiOrder::of(q);
    const double n = static_cast<double>(coupling.pairs.size());
    detail::CompensatedSum l1, lp;
    for (const auto& [x, y] : coupling.pairs) {
        l1.add(gauss_power(kernel(x[0]), f, 1.0, false));
        lp.add(gauss_power(kernel(y[0]), f, p, false));
    }
    const double lhs = l1.value() / n;
    const double norm_p = std::pow(lp.value() / n, 1.0 / p);
    auto route = [&](const std::string& name, double renyi_value) {
        const double rhs = norm_p * std::exp((q - 1.0) / q * renyi_value);
        return finish(name, lhs, rhs, kExactSlack * std::abs(rhs), 0.0, true);
    };
    DistributionalResult r;
    r.unrefined = route("dist_power_harnack", convexity_lift(rho_q, order, coupling).value);
    r.refined_first = route("dist_power_harnack_refined_1", refined_renyi_bound(rho_q, order, coupling, RefinedVariant::first).value);
    r.refined_second = route("dist_power_harnack_refined_2", refined_renyi_bound(rho_q, order, coupling, RefinedVariant::second).value);
    if (rho_kl) {
        require_sign_controlled(f, true);
        detail::CompensatedSum ll, lf;
        for (const auto& [x, y] : coupling.pairs) {
            ll.add(gauss_log(kernel(x[0]), f));
            lf.add(gauss_power(kernel(y[0]), f, 1.0, true));
        }
        const double kl = convexity_lift(rho_kl, RenyiOrder::kl(), coupling).value;
        const double lhs_log = ll.value() / n;
        const double rhs_log = std::log(lf.value() / n) + kl;
        r.log_route = finish("dist_log_harnack", lhs_log, rhs_log,
                             kExactSlack * std::max(std::abs(lhs_log), std::abs(rhs_log)), 0.0, true);
    }
    return r;
}

}  // namespace shiftbound::harnack
