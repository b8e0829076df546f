#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "perfusion/geometry.hpp"

namespace perfusion {

/// Trapezoid-rule L2 norm of nodal values on a (possibly nonuniform) grid.
inline double discrete_l2(std::span<const double> s, std::span<const double> u) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double h = s[i + 1] - s[i];
        sum += 0.5 * h * (u[i] * u[i] + u[i + 1] * u[i + 1]);
    }
    return std::sqrt(sum);
}

/// || a^2 u' ||_{L2} with face-midpoint weights and face differences.
inline double weighted_grad_l2(std::span<const double> s, std::span<const double> u,
                               const RadiusProfile& radius) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double h = s[i + 1] - s[i];
        const double a = radius.value(0.5 * (s[i] + s[i + 1]));
        const double d = a * a * (u[i + 1] - u[i]) / h;
        sum += h * d * d;
    }
    return std::sqrt(sum);
}

/// Weighted H^a norm: sqrt(||u||^2 + ||a^2 u'||^2) on the discrete grid.
inline double ha_norm(std::span<const double> s, std::span<const double> u,
                      const RadiusProfile& radius) {
    const double l2 = discrete_l2(s, u);
    const double g = weighted_grad_l2(s, u, radius);
    return std::sqrt(l2 * l2 + g * g);
}

} // namespace perfusion
