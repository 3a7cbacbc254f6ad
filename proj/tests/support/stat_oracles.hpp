#pragma once

// Test-side statistical oracles, independent of the library under test.

#include <cmath>
#include <numbers>

namespace oracle {

// P(||Z||_2 <= c) for Z ~ N(0, I_d): Simpson integration of the chi density
// f(r) = 2^(1-d/2) r^(d-1) exp(-r^2/2) / Gamma(d/2) over [0, c].
inline double chi_cdf(double c, int dim) {
    if (c <= 0.0) return 0.0;
    const double norm =
        std::pow(2.0, 1.0 - 0.5 * dim) / std::tgamma(0.5 * dim);
    const auto density = [&](double r) {
        return norm * std::pow(r, dim - 1) * std::exp(-0.5 * r * r);
    };
    const int steps = 20000;  // even
    const double h = c / steps;
    double acc = density(0.0) + density(c);
    for (int i = 1; i < steps; ++i) {
        acc += density(h * i) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return acc * h / 3.0;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Inverse standard normal CDF by bisection on erfc.
inline double normal_quantile(double p) {
    double lo = -10.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (normal_cdf(mid) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace oracle
