#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace shiftbound::detail {

struct QuadResult {
    double value;
    double error;
    double l1;
};

// Adaptive 61-point Gauss-Kronrod on a finite interval.
template <class F>
QuadResult integrate(F&& f, double a, double b, double tol, unsigned max_depth = 20) {
    double err = 0.0;
    double l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, a, b, max_depth, tol, &err, &l1);
    return {v, err, l1};
}

// Integral of f over [a, +inf) for decaying f.
template <class F>
double integrate_tail(F&& f, double a, double tol) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([&](double u) { return f(a + u); }, 0.0,
                                std::numeric_limits<double>::infinity(), tol);
}

}  // namespace shiftbound::detail
