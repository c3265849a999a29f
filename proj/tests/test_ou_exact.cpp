#include "doctest.h"

#include "shiftbound/ou_exact.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

using namespace shiftbound;

namespace {

// Iterates the one-step kernel x -> N((1 - alpha h) x, 2h).
GaussianLaw1D compose_kernel(double alpha, double h, int N, double x) {
    double m = x, v = 0.0;
    const double L = 1.0 - alpha * h;
    for (int n = 0; n < N; ++n) {
        m *= L;
        v = L * L * v + 2.0 * h;
    }
    return {m, v};
}

}  // namespace

TEST_CASE("discrete OU law") {
    const auto law = ou_discrete_law(OUSpec::discrete(1.0, 0.1, 2), 1.0);
    CHECK(law.mean == doctest::Approx(0.81).epsilon(1e-15));
    CHECK(law.variance == doctest::Approx(0.2 * (1 - 0.6561) / 0.19).epsilon(1e-14));
    const auto rw = ou_discrete_law(OUSpec::discrete(0.0, 0.1, 5), 0.0);
    CHECK(rw.mean == 0.0);
    CHECK(rw.variance == doctest::Approx(1.0).epsilon(1e-15));
    const auto one = ou_discrete_law(OUSpec::discrete(0.7, 0.3, 1), 2.0);
    CHECK(one.mean == doctest::Approx(0.79 * 2.0).epsilon(1e-15));
    CHECK(one.variance == doctest::Approx(0.6).epsilon(1e-14));
    // L = -1 sits on the limit branch as well.
    CHECK(ou_discrete_law(OUSpec::discrete(2.0, 1.0, 3), 1.0).variance == doctest::Approx(6.0));
}

TEST_CASE("discrete law matches kernel composition") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ua(-0.5, 2), uh(0.001, 0.2), ux(-3, 3);
    std::uniform_int_distribution<int> un(1, 60);
    for (int i = 0; i < 200; ++i) {
        const double a = ua(rng), h = uh(rng), x = ux(rng);
        const int N = un(rng);
        const auto law = ou_discrete_law(OUSpec::discrete(a, h, N), x);
        const auto ref = compose_kernel(a, h, N, x);
        CHECK(law.mean == doctest::Approx(ref.mean).epsilon(1e-12));
        CHECK(law.variance == doctest::Approx(ref.variance).epsilon(1e-12));
    }
}

TEST_CASE("continuous OU law") {
    const auto st = ou_continuous_law(OUSpec::continuous(1.0, 50.0), 3.0);
    CHECK(std::abs(st.mean) < 1e-20);
    CHECK(st.variance == doctest::Approx(1.0).epsilon(1e-15));
    const auto bm = ou_continuous_law(OUSpec::continuous(0.0, 1.0), 2.0);
    CHECK(bm.mean == 2.0);
    CHECK(bm.variance == 2.0);
    const auto c = ou_continuous_law(OUSpec::continuous(1.0, 0.5), 1.0);
    CHECK(c.mean == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK(c.variance == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-15));
    // h -> 0 limit of the discrete law.
    const auto d = ou_discrete_law(OUSpec::discrete(1.0, 0.5 / 200000, 200000), 1.0);
    CHECK(d.mean == doctest::Approx(c.mean).epsilon(1e-5));
    CHECK(d.variance == doctest::Approx(c.variance).epsilon(1e-5));
}

TEST_CASE("exact OU Renyi divergences") {
    const auto d = ou_renyi_exact(OUSpec::discrete(1.0, 0.1, 2), 1.0, 0.0, RenyiOrder::of(2), OUMode::discrete);
    CHECK(d.value == doctest::Approx(0.38 / (0.4 * (1.0 / (0.81 * 0.81) - 1.0))).epsilon(1e-13));
    CHECK(d.value == doctest::Approx(1.8124).epsilon(1e-4));
    const auto law0 = ou_discrete_law(OUSpec::discrete(1.0, 0.1, 2), 1.0);
    const auto law1 = ou_discrete_law(OUSpec::discrete(1.0, 0.1, 2), 0.0);
    CHECK(d.value == doctest::Approx(renyi_gaussian_isotropic(Vector::Constant(1, law0.mean), Vector::Constant(1, law1.mean),
                                                              law0.variance, RenyiOrder::of(2)).value).epsilon(1e-13));
    const auto c = ou_renyi_exact(OUSpec::continuous(0.0, 1.0), std::sqrt(2.0), 0.0, RenyiOrder::kl(), OUMode::continuous);
    CHECK(c.value == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ou_renyi_exact(OUSpec::continuous(1.0, 1.0), 0.4, 0.4, RenyiOrder::of(3), OUMode::continuous).value == 0.0);
    CHECK(ou_renyi_constant(OUSpec::discrete(0.0, 0.1, 10), RenyiOrder::of(2), OUMode::discrete) ==
          doctest::Approx(2.0 / (4 * 0.1 * 10)).epsilon(1e-15));
}

TEST_CASE("isotropic wrapper multiplies squared distances") {
    Vector x(3), y(3);
    x << 1, 2, 3;
    y << 0, 2, 1;
    const auto spec = OUSpec::continuous(0.5, 2.0);
    const double v = ou_renyi_exact(spec, x, y, RenyiOrder::of(2), OUMode::continuous).value;
    CHECK(v == doctest::Approx(ou_renyi_exact(spec, 1.0, 0.0, RenyiOrder::of(2), OUMode::continuous).value * 5.0));
}

TEST_CASE("property: exactness against Gaussian laws") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ua(-0.5, 2), uh(1e-4, 0.2), uq(0.01, 8), ux(-3, 3);
    std::uniform_int_distribution<int> un(1, 100);
    for (int i = 0; i < 300; ++i) {
        const auto spec = OUSpec::discrete(ua(rng), uh(rng), un(rng));
        const double x = ux(rng), y = ux(rng), q = uq(rng);
        const auto lx = ou_discrete_law(spec, x), ly = ou_discrete_law(spec, y);
        const double exact = renyi_gaussian_isotropic(Vector::Constant(1, lx.mean), Vector::Constant(1, ly.mean), lx.variance,
                                                      RenyiOrder::of(q)).value;
        const double v = ou_renyi_exact(spec, x, y, RenyiOrder::of(q), OUMode::discrete).value;
        CHECK(std::abs(v - exact) <= 1e-12 * (1.0 + exact));
    }
}

TEST_CASE("property: discrete to continuous gap halves with h") {
    const double T = 1.0, a = 1.0;
    const double cont = ou_renyi_constant(OUSpec::continuous(a, T), RenyiOrder::of(2), OUMode::continuous);
    double prev_gap = 0.0;
    for (int k = 0; k < 8; ++k) {
        const int N = 10 << k;
        const double gap = std::abs(ou_renyi_constant(OUSpec::discrete(a, T / N, N), RenyiOrder::of(2), OUMode::discrete) - cont);
        if (k > 0) {
            CHECK(gap / prev_gap > 0.4);
            CHECK(gap / prev_gap < 0.6);
        }
        prev_gap = gap;
    }
}

TEST_CASE("finiteness thresholds") {
    const auto q2 = RenyiOrder::of(2);
    CHECK(finiteness_threshold(1, 1, q2, ThresholdVariant::refined) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-15));
    CHECK(finiteness_threshold(1, 1, q2, ThresholdVariant::unrefined) == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-15));
    CHECK(finiteness_threshold(1, 0, q2, ThresholdVariant::refined) == 0.0);
    CHECK(finiteness_threshold(1, 0, q2, ThresholdVariant::unrefined) == 0.0);
    CHECK(finiteness_threshold(-1, 2, q2, ThresholdVariant::refined) == kInf);
    CHECK(finiteness_threshold(0, 2, RenyiOrder::of(3), ThresholdVariant::refined) == doctest::Approx(2.0));
    CHECK_THROWS_AS(finiteness_threshold(1, 1, RenyiOrder::of(0.5), ThresholdVariant::refined), std::invalid_argument);
}

TEST_CASE("property: threshold separates finite and infinite exact divergences") {
    for (double a : {0.3, 1.0, 2.5}) {
        for (double s2 : {0.5, 1.0, 4.0}) {
            for (double q : {1.5, 2.0, 3.0}) {
                const double t0 = finiteness_threshold(a, s2, RenyiOrder::of(q), ThresholdVariant::refined);
                for (double f : {0.99, 1.01}) {
                    const auto spec = OUSpec::continuous(a, f * t0);
                    const auto base = ou_continuous_law(spec, 0.0);
                    const GaussianLaw1D mu{0.0, std::exp(-2 * a * spec.T) * s2 + base.variance};
                    const auto r = renyi_gaussian_1d_full(mu, base, RenyiOrder::of(q));
                    CHECK(r.finite() == (f > 1.0));
                }
            }
        }
    }
}
