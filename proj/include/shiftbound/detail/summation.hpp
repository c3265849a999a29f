#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace shiftbound::detail {

// Neumaier compensated sum.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// log(sum exp(v_i)) without overflow.
inline double log_sum_exp(std::span<const double> v) {
    if (v.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    CompensatedSum s;
    for (double x : v) s.add(std::exp(x - m));
    return m + std::log(s.value());
}

}  // namespace shiftbound::detail
