#include "shiftbound/shift_schedule.hpp"

#include "shiftbound/detail/quadrature.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace shiftbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSmallRate = 1e-12;

void require_positive_L(double L) {
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("shift schedule: L must be positive");
}

}  // namespace

double shift_ratio(std::int64_t k, double L) {
    require_positive_L(L);
    if (k < 0) throw std::invalid_argument("shift_ratio: k must be nonnegative");
    const double lu = -2.0 * std::log(L);
    const double n = static_cast<double>(k + 1);
    if (lu == 0.0) return 1.0 / n;
    if (n * lu > 700.0) return std::exp(std::log(std::expm1(lu)) - n * lu);
    return std::expm1(lu) / std::expm1(n * lu);
}

ShiftSchedule optimal_shifts_closed_form(std::int64_t N, double L) {
    require_positive_L(L);
    if (N < 1) throw std::invalid_argument("optimal_shifts_closed_form: N must be at least 1");
    ShiftSchedule out;
    out.etas.resize(static_cast<std::size_t>(N));
    for (std::int64_t i = 0; i < N; ++i) out.etas[static_cast<std::size_t>(i)] = shift_ratio(N - 1 - i, L);
    out.etas.back() = 1.0;
    out.objective = shift_ratio(N - 1, L);
    return out;
}

double shift_objective(const std::vector<double>& etas, double L) {
    require_positive_L(L);
    if (etas.empty()) throw std::invalid_argument("shift_objective: empty schedule");
    if (etas.back() != 1.0) throw std::invalid_argument("shift_objective: last shift must equal 1");
    const double L2 = L * L;
    double weight = 1.0;
    double sum = 0.0;
    for (double eta : etas) {
        if (!(eta >= 0.0)) throw std::invalid_argument("shift_objective: shifts must be nonnegative");
        sum += weight * eta * eta;
        weight *= L2 * (1.0 - eta) * (1.0 - eta);
    }
    return sum;
}

ShiftSchedule dp_oracle_optimize(std::int64_t N, double L, double grid) {
    require_positive_L(L);
    if (N < 1) throw std::invalid_argument("dp_oracle_optimize: N must be at least 1");
    const double L2 = L * L;
    std::vector<double> reversed{1.0};
    double value = 1.0;
    for (std::int64_t n = 1; n < N; ++n) {
        const double a = L2 * value;
        double best_eta = 0.0;
        double best = kInf;
        if (grid <= 0.0) {
            best_eta = 1.0 / (1.0 + 1.0 / a);
            best = best_eta * best_eta + a * (1.0 - best_eta) * (1.0 - best_eta);
        } else {
            const auto cells = static_cast<std::int64_t>(std::ceil(1.0 / grid));
            for (std::int64_t j = 0; j <= cells; ++j) {
                const double eta = std::min(1.0, static_cast<double>(j) * grid);
                const double v = eta * eta + a * (1.0 - eta) * (1.0 - eta);
                if (v < best) {
                    best = v;
                    best_eta = eta;
                }
            }
        }
        reversed.push_back(best_eta);
        value = best;
    }
    ShiftSchedule out;
    out.etas.assign(reversed.rbegin(), reversed.rend());
    out.objective = value;
    return out;
}

double continuous_eta(double alpha, double T, double t) {
    if (!(T > 0.0)) throw std::domain_error("continuous_eta: T must be positive");
    if (!(t >= 0.0) || !(t < T)) throw std::domain_error("continuous_eta: requires 0 <= t < T");
    const double tau = T - t;
    if (std::abs(alpha * T) < kSmallRate) return 1.0 / tau;
    return 2.0 * alpha / std::expm1(2.0 * alpha * tau);
}

double ContinuousSchedule::eta(double t) const { return continuous_eta(alpha, T, t); }

double ContinuousSchedule::integral(double t) const {
    if (!(t >= 0.0) || t > T) throw std::domain_error("ContinuousSchedule::integral: t outside [0, T]");
    if (t == T) return kInf;
    if (std::abs(alpha * T) < kSmallRate) return std::log(T / (T - t));
    return std::log(std::expm1(-2.0 * alpha * T) / std::expm1(-2.0 * alpha * (T - t)));
}

double ContinuousSchedule::optimum() const {
    if (std::abs(alpha * T) < kSmallRate) return 1.0 / T;
    return 2.0 * alpha / std::expm1(2.0 * alpha * T);
}

double continuous_objective(double alpha, double T, const ContinuousSchedule& schedule) {
    if (!(T > 0.0)) throw std::domain_error("continuous_objective: T must be positive");
    if (schedule.T < T) throw std::invalid_argument("continuous_objective: schedule horizon too short");
    auto integrand = [&](double t) {
        if (t >= schedule.T) return 0.0;
        const double eta = schedule.eta(t);
        return std::exp(2.0 * std::log(eta) - 2.0 * alpha * t - 2.0 * schedule.integral(t));
    };
    const auto r = detail::integrate(integrand, 0.0, T, 1e-13);
    return r.value;
}

double continuous_objective(double alpha, double T, const std::function<double(double)>& schedule) {
    namespace ode = boost::numeric::odeint;
    if (!(T > 0.0)) throw std::domain_error("continuous_objective: T must be positive");

    using State = std::array<double, 2>;  // {int_0^t eta, partial functional}
    auto rhs = [&](const State& s, State& ds, double t) {
        const double eta = schedule(t);
        if (!(eta >= 0.0)) throw std::invalid_argument("continuous_objective: schedule must be nonnegative");
        ds[0] = eta;
        ds[1] = eta * eta * std::exp(-2.0 * alpha * t - 2.0 * s[0]);
    };

    constexpr int kLevels = 9;
    const double eps0 = 1e-2 * T;
    auto stepper = ode::make_controlled(1e-13, 1e-12, ode::runge_kutta_dopri5<State>());
    State state{0.0, 0.0};
    double t = 0.0;
    std::array<double, kLevels> partial{};
    for (int k = 0; k < kLevels; ++k) {
        const double t_end = T - eps0 / std::ldexp(1.0, k);
        ode::integrate_adaptive(stepper, rhs, state, t, t_end, (t_end - t) * 1e-3);
        t = t_end;
        if (!std::isfinite(state[1])) return kInf;
        partial[static_cast<std::size_t>(k)] = state[1];
    }

    // Successive tail increments must shrink for the functional to converge.
    const double d1 = partial[kLevels - 1] - partial[kLevels - 2];
    const double d0 = partial[kLevels - 2] - partial[kLevels - 3];
    if (d0 > 0.0 && d1 >= 0.75 * d0) return kInf;

    // Richardson extrapolation in eps with eps-halving.
    std::array<double, kLevels> row = partial;
    constexpr int kOrder = 3;
    for (int j = 1; j <= kOrder; ++j) {
        const double f = std::ldexp(1.0, j) - 1.0;
        for (int k = kLevels - 1; k >= j; --k)
            row[static_cast<std::size_t>(k)] += (row[static_cast<std::size_t>(k)] - row[static_cast<std::size_t>(k - 1)]) / f;
    }
    return row[kLevels - 1];
}

}  // namespace shiftbound
