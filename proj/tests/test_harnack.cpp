#include "doctest.h"
#include "oracles.hpp"

#include "shiftbound/harnack.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

using namespace shiftbound;
using namespace shiftbound::harnack;

namespace {

BoundReport ou_bound(double alpha, double t, double x, double y, RenyiOrder q) {
    return langevin_continuous_bound(alpha, t, q, SquaredDistance{(x - y) * (x - y)});
}

// E f(Z) for Z ~ N(m, v) by Simpson on a wide window.
double simpson_expect(const std::function<double(double)>& f, double m, double v) {
    const double s = std::sqrt(v);
    return oracle::simpson([&](double z) { return f(z) * oracle::normal_pdf(z, m, v); }, m - 14 * s, m + 14 * s, 400000);
}

}  // namespace

TEST_CASE("Harnack constants") {
    BoundReport zero;
    zero.order = RenyiOrder::of(2);
    zero.value = 0.0;
    CHECK(power_harnack_constant(zero, 2).constant == 1.0);
    CHECK_THROWS_AS(power_harnack_constant(zero, 3), std::invalid_argument);
    CHECK_THROWS_AS(power_harnack_constant(zero, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(log_harnack_constant(zero), std::invalid_argument);
    for (double a : {0.3, 1.0, 2.0}) {
        for (double p : {1.5, 2.0, 4.0}) {
            const double t = 0.8, x = 1.2, y = -0.4;
            const auto c = power_harnack_constant(ou_bound(a, t, x, y, RenyiOrder::of(p / (p - 1))), p);
            const double coef = std::exp(a * p * (x - y) * (x - y) / (2 * (p - 1) * std::expm1(2 * a * t)));
            CHECK(std::pow(c.constant, p) == doctest::Approx(coef).epsilon(1e-12));
        }
    }
    // p -> infinity recovers the KL additive constant.
    const double kl = ou_bound(1, 1, 1, 0, RenyiOrder::kl()).value;
    const double p = 1e7;
    const auto big = power_harnack_constant(ou_bound(1, 1, 1, 0, RenyiOrder::of(p / (p - 1))), p);
    CHECK(p * std::log(big.constant) == doctest::Approx(kl).epsilon(1e-6));
    const auto rev = reverse_harnack_constant(ou_bound(1, 1, 1, 0, RenyiOrder::of(0.5)), -1);
    CHECK(rev.constant == doctest::Approx(std::exp(-0.5 * kl)).epsilon(1e-12));
    CHECK_THROWS_AS(reverse_harnack_constant(ou_bound(1, 1, 1, 0, RenyiOrder::of(0.5)), -2), std::invalid_argument);
}

TEST_CASE("test functions") {
    const auto q = TestFunction::quadratic_clipped(0.5, 1.0, -1.0, 0.1, 0.6);
    CHECK(q(0.0) == 0.5);
    CHECK(q(10.0) == 0.1);
    CHECK(q(0.5) == 0.6);
    const auto k = q.kinks();
    for (double z : k) CHECK((std::abs(0.5 + z - z * z - 0.1) < 1e-12 || std::abs(0.5 + z - z * z - 0.6) < 1e-12));
    CHECK(TestFunction::indicator_halfspace(0.3)(0.3) == 1.0);
    CHECK(TestFunction::indicator_halfspace(0.3)(0.2) == 0.0);
    CHECK(TestFunction::exp_affine(2, 1)(0.5) == doctest::Approx(std::exp(2.0)));
    CHECK_THROWS_AS(TestFunction::quadratic_clipped(0, 0, 0, 1, 0), std::invalid_argument);
}

TEST_CASE("exact expectations agree with Simpson") {
    const auto out = ou_outputs(OUSpec::continuous(1.0, 0.5), OUMode::continuous, 0.8, -0.3);
    const auto f = TestFunction::quadratic_clipped(1.0, 0.4, -0.7, 0.2, 3.0);
    const auto c = power_harnack_constant(ou_bound(1.0, 0.5, 0.8, -0.3, RenyiOrder::of(2)), 2);
    const auto r = check_power_harnack(out, f, c);
    const double lhs = std::pow(simpson_expect(f.fn ? f.fn : [&](double z) { return f(z); }, out.mu.mean, out.mu.variance), 2);
    const double rhs = simpson_expect([&](double z) { return f(z) * f(z); }, out.nu.mean, out.nu.variance) * c.constant * c.constant;
    CHECK(r.lhs == doctest::Approx(lhs).epsilon(1e-8));
    CHECK(r.rhs == doctest::Approx(rhs).epsilon(1e-8));
    const auto ind = TestFunction::indicator_halfspace(0.1);
    const auto ri = check_power_harnack(out, ind, c);
    const double Phi = 0.5 * std::erfc((0.1 - out.mu.mean) / std::sqrt(2 * out.mu.variance));
    CHECK(ri.lhs == doctest::Approx(Phi * Phi).epsilon(1e-10));
}

TEST_CASE("extremal test functions attain the Harnack bounds") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> ua(-0.5, 2), ut(0.05, 2), ux(-2, 2), up(1.1, 6), un(-4, -0.1);
    for (int i = 0; i < 100; ++i) {
        const double a = ua(rng), t = ut(rng), x = ux(rng), y = ux(rng), p = up(rng), pn = un(rng);
        const auto out = ou_outputs(OUSpec::continuous(a, t), OUMode::continuous, x, y);
        const auto cp = power_harnack_constant(ou_bound(a, t, x, y, RenyiOrder::of(p / (p - 1))), p);
        const auto rp = check_power_harnack(out, power_extremizer(out, p), cp);
        CHECK(rp.holds);
        CHECK(std::abs(rp.rel_gap()) <= 1e-9);
        const auto cl = log_harnack_constant(ou_bound(a, t, x, y, RenyiOrder::kl()));
        const auto rl = check_log_harnack(out, log_extremizer(out), cl);
        CHECK(rl.holds);
        CHECK(std::abs(rl.gap) <= 1e-9 * std::max(1.0, std::abs(rl.rhs)));
        const auto cr = reverse_harnack_constant(ou_bound(a, t, x, y, RenyiOrder::of(pn / (pn - 1))), pn);
        const auto rr = check_reverse_harnack(out, reverse_extremizer(out, pn), cr);
        CHECK(rr.holds);
        CHECK(std::abs(rr.rel_gap()) <= 1e-9);
    }
}

TEST_CASE("property: non-extremal functions hold with a positive gap") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> ua(0.1, 2), ut(0.1, 2), ux(-2, 2), uc(-1, 1), ulo(0.05, 0.5);
    for (int i = 0; i < 100; ++i) {
        const double a = ua(rng), t = ut(rng), x = ux(rng), y = ux(rng);
        if (std::abs(x - y) < 1e-3) continue;
        const auto out = ou_outputs(OUSpec::continuous(a, t), OUMode::continuous, x, y);
        const double lo = ulo(rng);
        const auto f = TestFunction::quadratic_clipped(1 + uc(rng), uc(rng), uc(rng), lo, lo + 2);
        const auto cp = power_harnack_constant(ou_bound(a, t, x, y, RenyiOrder::of(2)), 2);
        const auto rp = check_power_harnack(out, f, cp);
        CHECK(rp.holds);
        CHECK(rp.gap > 0);
        const auto rl = check_log_harnack(out, f, log_harnack_constant(ou_bound(a, t, x, y, RenyiOrder::kl())));
        CHECK(rl.holds);
        CHECK(rl.gap > 0);
        const auto rr = check_reverse_harnack(out, f, reverse_harnack_constant(ou_bound(a, t, x, y, RenyiOrder::of(0.5)), -1));
        CHECK(rr.holds);
        CHECK(rr.gap > 0);
        const auto e = TestFunction::exp_affine(uc(rng), uc(rng));
        CHECK(check_power_harnack(out, e, cp).holds);
    }
}

TEST_CASE("trivial Harnack cases") {
    const auto same = ou_outputs(OUSpec::continuous(1, 1), OUMode::continuous, 0.5, 0.5);
    const auto cp = power_harnack_constant(ou_bound(1, 1, 0.5, 0.5, RenyiOrder::of(2)), 2);
    CHECK(cp.constant == 1.0);
    CHECK(check_power_harnack(same, TestFunction::quadratic_clipped(1, 1, 0, 0.1, 2), cp).holds);
    const auto out = ou_outputs(OUSpec::continuous(1, 1), OUMode::continuous, 1.0, -1.0);
    const auto cl = log_harnack_constant(ou_bound(1, 1, 1, -1, RenyiOrder::kl()));
    const auto rc = check_log_harnack(out, TestFunction::linear(3.0, 0.0), cl);
    CHECK(rc.gap == doctest::Approx(cl.constant).epsilon(1e-12));
    const auto cr = reverse_harnack_constant(ou_bound(1, 1, 0.5, 0.5, RenyiOrder::of(0.5)), -1);
    const auto rr = check_reverse_harnack(same, TestFunction::linear(2.0, 0.0), cr);
    CHECK(rr.lhs == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(rr.rhs == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(rr.holds);
    CHECK_THROWS_AS(check_power_harnack(out, TestFunction::linear(0, 1), cp), std::invalid_argument);
    CHECK_THROWS_AS(check_log_harnack(out, TestFunction::quadratic_clipped(0, 1, 0, 0, 1), cl), std::invalid_argument);
    CHECK_THROWS_AS(check_log_harnack(out, TestFunction::custom([](double z) { return z; }), cl), std::invalid_argument);
    CHECK_THROWS_AS(check_log_harnack(out, TestFunction::linear(1, 0), cp), std::invalid_argument);
}

TEST_CASE("reverse Harnack exponent inversion") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uc(-1, 1), up(-4, -0.2);
    for (int i = 0; i < 50; ++i) {
        const double p = up(rng), x = uc(rng), y = uc(rng);
        const auto out = ou_outputs(OUSpec::continuous(1, 0.6), OUMode::continuous, x, y);
        const auto f = TestFunction::exp_affine(uc(rng), uc(rng));
        const auto fp = TestFunction::exp_affine(p * f.a, p * f.b);
        const double pi = 1 / p;
        const auto c = reverse_harnack_constant(ou_bound(1, 0.6, x, y, RenyiOrder::of(p / (p - 1))), p);
        const auto ci = reverse_harnack_constant(ou_bound(1, 0.6, x, y, RenyiOrder::of(pi / (pi - 1))), pi);
        CHECK(check_reverse_harnack(out, f, c).holds);
        CHECK(check_reverse_harnack(out, fp, ci).holds);
    }
}

TEST_CASE("local Poincare inequality") {
    const auto r = check_local_poincare(OUSpec::continuous(1, 0.7), TestFunction::linear(0.3, 1.0), 0.4);
    CHECK(r.lhs == doctest::Approx(1 - std::exp(-1.4)).epsilon(1e-14));
    CHECK(std::abs(r.lhs - r.rhs) <= 1e-12);
    CHECK(r.holds);
    const auto small = check_local_poincare(OUSpec::continuous(1, 1e-9), TestFunction::linear(0, 1), 0);
    CHECK(small.lhs < 1e-8);
    CHECK(small.rhs < 1e-8);
    for (double a : {-0.5, 0.0, 1.0, 3.0}) {
        const auto qd = check_local_poincare(OUSpec::continuous(a, 0.5), TestFunction::quadratic_clipped(0, 1, 0.5, -kInf, kInf), 0.7);
        CHECK(qd.holds);
        CHECK(qd.gap > 0);
        const auto law = ou_continuous_law(OUSpec::continuous(a, 0.5), 0.7);
        const auto f = [](double z) { return z + 0.5 * z * z; };
        const double m1 = simpson_expect(f, law.mean, law.variance);
        const double m2 = simpson_expect([&](double z) { return f(z) * f(z); }, law.mean, law.variance);
        CHECK(qd.lhs == doctest::Approx(m2 - m1 * m1).epsilon(1e-8));
    }
    CHECK_THROWS_AS(check_local_poincare(OUSpec::continuous(1, 1), TestFunction::exp_affine(1, 0), 0), std::invalid_argument);
}

TEST_CASE("Donsker-Varadhan sandwich") {
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> uc(-1, 1);
    const double a = 0.8, t = 0.9, x = 1.1, y = -0.2;
    const auto out = ou_outputs(OUSpec::continuous(a, t), OUMode::continuous, x, y);
    const double kl = ou_bound(a, t, x, y, RenyiOrder::kl()).value;
    for (int i = 0; i < 50; ++i) {
        CHECK(donsker_varadhan(out, TestFunction::linear(uc(rng), 3 * uc(rng))) <= kl * (1 + 1e-12));
        CHECK(donsker_varadhan(out, TestFunction::quadratic_clipped(uc(rng), uc(rng), uc(rng), -2, 2)) <= kl * (1 + 1e-10));
    }
    const double slope = (out.mu.mean - out.nu.mean) / out.nu.variance;
    CHECK(donsker_varadhan(out, TestFunction::linear(0, slope)) == doctest::Approx(kl).epsilon(1e-12));
    // Nonlinear potential: the DV value stays under the Langevin KL bound.
    const auto pot = sim::PotentialSpec::trig_perturbed(0.3);
    const double h = 0.1;
    const int N = 10;
    const auto s = sample_outputs(pot, h, N, 1.0, -1.0, 5, 100000);
    const double bound = langevin_discrete_bound(KernelSpec::langevin_euler(0.7, 1.3, h), N, RenyiOrder::kl(), SquaredDistance{4}).value;
    for (double b : {0.5, 1.0, 2.0}) CHECK(donsker_varadhan(s, TestFunction::linear(0, b)) <= bound);
}

TEST_CASE("Monte Carlo Harnack checks") {
    std::mt19937_64 rng(25);
    std::uniform_real_distribution<double> ux(-1.5, 1.5), uc(-1, 1), ulo(0.05, 0.5);
    const auto pot = sim::PotentialSpec::trig_perturbed(0.3);
    const double h = 0.1;
    const int N = 10;
    const auto kernel = KernelSpec::langevin_euler(pot.alpha(), pot.beta(), h);
    for (int i = 0; i < 10; ++i) {
        const double x = ux(rng), y = ux(rng), lo = ulo(rng);
        const auto f = TestFunction::quadratic_clipped(1 + uc(rng), uc(rng), uc(rng), lo, lo + 2);
        const auto s = sample_outputs(pot, h, N, x, y, 100 + static_cast<std::uint64_t>(i), 20000);
        const double d2 = (x - y) * (x - y);
        const auto cp = power_harnack_constant(langevin_discrete_bound(kernel, N, RenyiOrder::of(2), SquaredDistance{d2}), 2);
        const auto rp = check_power_harnack(s, f, cp);
        CHECK(rp.se > 0);
        CHECK(rp.holds);
        CHECK(check_log_harnack(s, f, log_harnack_constant(langevin_discrete_bound(kernel, N, RenyiOrder::kl(), SquaredDistance{d2}))).holds);
        CHECK(check_reverse_harnack(s, f, reverse_harnack_constant(langevin_discrete_bound(kernel, N, RenyiOrder::of(0.5), SquaredDistance{d2}), -1)).holds);
    }
    // Discretized Ito kernel with state-dependent noise.
    sim::ItoSpec ito;
    ito.drift = [](double, const Vector& z, Vector& b) { b = -z; };
    ito.diffusion = [](double, const Vector& z, Matrix& s) { s = Matrix::Constant(1, 1, std::sqrt(2.0) * (1 + 0.1 * std::sin(z[0]))); };
    const auto k = KernelSpec::ito_euler(0.99, 1.0, 2 * 0.81, 2 * 1.21, 0.05);
    for (int i = 0; i < 10; ++i) {
        const double x = ux(rng), y = ux(rng), lo = ulo(rng);
        const auto f = TestFunction::quadratic_clipped(1 + uc(rng), uc(rng), uc(rng), lo, lo + 2);
        const auto s = sample_outputs(ito, 0.05, 20, x, y, 200 + static_cast<std::uint64_t>(i), 20000);
        const auto c = log_harnack_constant(mult_noise_bound(k, 20, (x - y) * (x - y)));
        CHECK(check_log_harnack(s, f, c).holds);
    }
}

TEST_CASE("distributional Harnack") {
    const double a = 1.0, t = 0.8, p = 2.0, q = p / (p - 1);
    const auto spec = OUSpec::continuous(a, t);
    const GaussianKernel kernel = [spec](double z) { return ou_continuous_law(spec, z); };
    const double K = ou_bound(a, t, 1, 0, RenyiOrder::kl()).value;
    const PointwiseRho rho_q = [&](const Vector& x, const Vector& y) { return q * K * (x - y).squaredNorm(); };
    const PointwiseRho rho_kl = [&](const Vector& x, const Vector& y) { return K * (x - y).squaredNorm(); };
    const auto f = TestFunction::quadratic_clipped(1, 0.5, -0.3, 0.1, 2);

    CouplingSample dirac;
    dirac.pairs = {{Vector::Constant(1, 0.7), Vector::Constant(1, -0.2)}};
    const auto d = distributional_harnack(dirac, kernel, f, p, rho_q, rho_kl);
    const auto single = check_power_harnack(ou_outputs(spec, OUMode::continuous, 0.7, -0.2), f,
                                            power_harnack_constant(ou_bound(a, t, 0.7, -0.2, RenyiOrder::of(q)), p));
    CHECK(d.unrefined.lhs == doctest::Approx(std::pow(single.lhs, 1 / p)).epsilon(1e-12));
    CHECK(d.unrefined.rhs == doctest::Approx(std::pow(single.rhs, 1 / p)).epsilon(1e-12));
    CHECK(d.refined_first.rhs == doctest::Approx(d.unrefined.rhs).epsilon(1e-12));

    // N(0, s2) against delta_0 through the quantile coupling of a sample.
    std::mt19937_64 rng(26);
    std::normal_distribution<double> nd(0.0, 0.6);
    std::vector<double> xs(400), zeros(400, 0.0);
    for (auto& v : xs) v = nd(rng);
    const auto c = quantile_coupling(xs, zeros);
    const auto r = distributional_harnack(c, kernel, f, p, rho_q, rho_kl);
    CHECK(r.unrefined.holds);
    CHECK(r.refined_first.holds);
    CHECK(r.refined_second.holds);
    CHECK(r.log_route->holds);
    CHECK(r.refined_first.rhs <= r.unrefined.rhs * (1 + 1e-12));
    CHECK(r.refined_second.rhs <= r.unrefined.rhs * (1 + 1e-12));

    std::uniform_real_distribution<double> ux(-1, 1);
    std::uniform_int_distribution<int> pick(0, 3);
    for (int trial = 0; trial < 30; ++trial) {
        CouplingSample g;
        const std::vector<double> ys{ux(rng), ux(rng), ux(rng), ux(rng)};
        for (int i = 0; i < 12; ++i) g.pairs.emplace_back(Vector::Constant(1, ux(rng)), Vector::Constant(1, ys[static_cast<std::size_t>(pick(rng))]));
        const auto rr = distributional_harnack(g, kernel, f, p, rho_q);
        CHECK(rr.refined_first.rhs <= rr.unrefined.rhs * (1 + 1e-12));
        CHECK(rr.refined_second.rhs <= rr.unrefined.rhs * (1 + 1e-12));
        CHECK(rr.refined_first.holds);
        CHECK(rr.refined_second.holds);
        CHECK_FALSE(rr.log_route.has_value());
    }
}
