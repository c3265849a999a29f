#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace shiftbound {

// Discrete shift weights eta_0..eta_{N-1} and their objective value.
struct ShiftSchedule {
    std::vector<double> etas;
    double objective = 0.0;
};

// R_k = (L^{-2} - 1) / (L^{-2(k+1)} - 1), equal to 1/(k+1) at L = 1.
double shift_ratio(std::int64_t k, double L);

ShiftSchedule optimal_shifts_closed_form(std::int64_t N, double L);

double shift_objective(const std::vector<double>& etas, double L);

// grid <= 0 uses the exact one-step minimizer; grid > 0 minimizes each step over
// the grid {0, grid, 2 grid, ..., 1}.
ShiftSchedule dp_oracle_optimize(std::int64_t N, double L, double grid = 0.0);

// Optimal continuous-time drift schedule on [0, T).
struct ContinuousSchedule {
    double alpha;
    double T;

    double eta(double t) const;
    // Integral of eta over [0, t].
    double integral(double t) const;
    // Value of the functional at this schedule.
    double optimum() const;
};

double continuous_eta(double alpha, double T, double t);

double continuous_objective(double alpha, double T, const ContinuousSchedule& schedule);

// General schedules; +inf when the functional diverges.
double continuous_objective(double alpha, double T, const std::function<double(double)>& schedule);

}  // namespace shiftbound
