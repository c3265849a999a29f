#include "doctest.h"
#include "oracles.hpp"

#include "shiftbound/shift_schedule.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

using namespace shiftbound;

TEST_CASE("closed-form optimal shifts") {
    const auto one = optimal_shifts_closed_form(1, 0.37);
    CHECK(one.etas == std::vector<double>{1.0});
    CHECK(one.objective == 1.0);

    const auto two = optimal_shifts_closed_form(2, 0.5);
    CHECK(two.etas[0] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(two.etas[1] == 1.0);
    CHECK(two.objective == doctest::Approx(0.25 / 1.25).epsilon(1e-15));

    const auto flat = optimal_shifts_closed_form(4, 1.0);
    const std::vector<double> expect{0.25, 1.0 / 3.0, 0.5, 1.0};
    for (std::size_t i = 0; i < 4; ++i) CHECK(flat.etas[i] == doctest::Approx(expect[i]).epsilon(1e-15));
    CHECK(flat.objective == doctest::Approx(0.25).epsilon(1e-15));

    // Near L = 1 the ratio stays continuous.
    CHECK(shift_ratio(9, 1.0 + 1e-13) == doctest::Approx(0.1).epsilon(1e-11));
    CHECK(shift_ratio(9, 1.0 - 1e-13) == doctest::Approx(0.1).epsilon(1e-11));
}

TEST_CASE("shift objective") {
    CHECK(shift_objective({1.0}, 0.3) == 1.0);
    CHECK(shift_objective({0.0, 1.0}, 0.7) == doctest::Approx(0.49).epsilon(1e-15));
    CHECK(shift_objective({0.2, 1.0}, 0.5) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK_THROWS_AS(shift_objective({0.2, 0.9}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(shift_objective({-0.2, 1.0}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(shift_objective({}, 0.5), std::invalid_argument);
}

TEST_CASE("dynamic programming oracle") {
    CHECK(dp_oracle_optimize(2, 0.5).objective == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(std::abs(dp_oracle_optimize(50, 0.99).objective - shift_ratio(49, 0.99)) < 1e-10);
    const auto g = dp_oracle_optimize(3, 1.0, 1e-4);
    CHECK(std::abs(g.objective - 1.0 / 3.0) < 1e-6);
    CHECK(std::abs(oracle::shift_grid_search(3, 1.0, 1e-3) - 1.0 / 3.0) < 1e-5);
}

TEST_CASE("property: closed form, recursion and naive objective agree") {
    for (int N = 1; N <= 50; ++N) {
        for (int l = 1; l <= 15; ++l) {
            const double L = 0.1 * l;
            const auto cf = optimal_shifts_closed_form(N, L);
            const auto dp = dp_oracle_optimize(N, L);
            CHECK(std::abs(cf.objective - dp.objective) <= 1e-12 * std::max(1.0, cf.objective));
            CHECK(std::abs(shift_objective(cf.etas, L) - cf.objective) <= 1e-12);
            CHECK(std::abs(oracle::shift_objective_naive(cf.etas, L) - cf.objective) <= 1e-12);
            for (std::size_t i = 0; i < cf.etas.size(); ++i)
                CHECK(std::abs(cf.etas[i] - dp.etas[i]) <= 1e-12);
        }
    }
}

TEST_CASE("property: recursive consistency of the value function") {
    for (double L : {0.2, 0.8, 1.0, 1.3}) {
        for (int N = 1; N < 30; ++N) {
            const double a = L * L * shift_ratio(N - 1, L);
            double best = 1e300;
            for (int j = 0; j <= 200000; ++j) {
                const double eta = j / 200000.0;
                best = std::min(best, eta * eta + a * (1 - eta) * (1 - eta));
            }
            CHECK(std::abs(best - shift_ratio(N, L)) < 1e-9);
            const double eta = 1.0 / (1.0 + 1.0 / a);
            CHECK(std::abs(eta * eta + a * (1 - eta) * (1 - eta) - shift_ratio(N, L)) < 1e-12);
        }
    }
}

TEST_CASE("property: perturbations and grid search never beat the closed form") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> uL(0.1, 1.5);
    std::uniform_int_distribution<int> uN(2, 20);
    for (int trial = 0; trial < 100; ++trial) {
        const int N = uN(rng);
        const double L = uL(rng);
        const auto cf = optimal_shifts_closed_form(N, L);
        for (int i = 0; i + 1 < N; ++i) {
            for (double d : {-1e-3, 1e-3}) {
                auto e = cf.etas;
                e[static_cast<std::size_t>(i)] = std::max(0.0, e[static_cast<std::size_t>(i)] + d);
                if (e[static_cast<std::size_t>(i)] == cf.etas[static_cast<std::size_t>(i)]) continue;
                CHECK(shift_objective(e, L) >= cf.objective * (1.0 - 1e-14));
                if (cf.objective > 1e-8) CHECK(shift_objective(e, L) > cf.objective);
            }
        }
        const auto g = dp_oracle_optimize(N, L, 1e-3);
        CHECK(g.objective >= cf.objective - 1e-15);
        CHECK(g.objective - cf.objective < 1e-5);
    }
    for (int N = 2; N <= 3; ++N)
        for (double L : {0.3, 1.0, 1.4}) CHECK(oracle::shift_grid_search(N, L, 2e-3) >= shift_ratio(N - 1, L) - 1e-15);
}

TEST_CASE("continuous schedule") {
    CHECK(continuous_eta(0, 1, 0.5) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(continuous_eta(1, 1, 0) == doctest::Approx(2.0 / (std::exp(2.0) - 1.0)).epsilon(1e-15));
    CHECK_THROWS_AS(continuous_eta(1, 1, 1), std::domain_error);
    CHECK_THROWS_AS(continuous_eta(1, 1, -0.1), std::domain_error);
    double prev = 0;
    for (double t = 0.9; t < 1.0; t += 0.0099) {
        const double e = continuous_eta(1, 1, t);
        CHECK(e > prev);
        prev = e;
    }
    CHECK(continuous_eta(1, 1, 1 - 1e-12) > 1e11);

    const ContinuousSchedule s{1.0, 1.0};
    for (double t : {0.1, 0.5, 0.9}) {
        const double ref = oracle::simpson([&](double u) { return s.eta(u); }, 0.0, t, 20000);
        CHECK(s.integral(t) == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("continuous objective") {
    const double opt = 2.0 / (std::exp(2.0) - 1.0);
    CHECK(continuous_objective(1, 1, ContinuousSchedule{1, 1}) == doctest::Approx(opt).epsilon(1e-10));
    CHECK(continuous_objective(0, 2, ContinuousSchedule{0, 2}) == doctest::Approx(0.5).epsilon(1e-10));
    const std::function<double(double)> eta = [](double t) { return continuous_eta(1, 1, t); };
    CHECK(continuous_objective(1, 1, eta) == doctest::Approx(opt).epsilon(1e-7));
    const std::function<double(double)> eta0 = [](double t) { return continuous_eta(0, 2, t); };
    CHECK(continuous_objective(0, 2, eta0) == doctest::Approx(0.5).epsilon(1e-7));
    const std::function<double(double)> pert = [](double t) { return continuous_eta(1, 1, t) * (1 + 0.1 * std::sin(t)); };
    CHECK(continuous_objective(1, 1, pert) > opt + 1e-6);
    for (double c : {0.9, 1.1}) {
        const std::function<double(double)> scaled = [c](double t) { return c * continuous_eta(1, 1, t); };
        CHECK(continuous_objective(1, 1, scaled) > opt);
    }
    // Too little drift near T leaves mass at the endpoint.
    const std::function<double(double)> weak = [](double t) { return 0.5 / (1.0 - t); };
    CHECK(std::isinf(continuous_objective(1, 1, weak)));
}
