#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace perfusion {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

/// Nodes via Newton iteration on the Legendre recurrence.
inline GaussRule make_gauss_rule(int n) {
    if (n < 1) throw std::invalid_argument("gauss rule order must be >= 1");
    GaussRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = -p1 / pp;
            z += dz;
            if (std::abs(dz) < std::numeric_limits<double>::epsilon()) break;
        }
        rule.x[i] = -z;
        rule.x[n - 1 - i] = z;
        rule.w[i] = rule.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return rule;
}

/// Cached rules for orders 1..32 (thread-safe static init).
inline const GaussRule& gauss_rule(int n) {
    static const std::vector<GaussRule> table = [] {
        std::vector<GaussRule> t;
        t.reserve(32);
        for (int k = 1; k <= 32; ++k) t.push_back(make_gauss_rule(k));
        return t;
    }();
    if (n < 1 || n > 32) throw std::invalid_argument("gauss rule order out of cached range");
    return table[static_cast<std::size_t>(n - 1)];
}

/// Integrate fn over [a, b] with an n-point rule.
template <class F>
double gauss_integrate(double a, double b, int n, F&& fn) {
    const GaussRule& g = gauss_rule(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t q = 0; q < g.x.size(); ++q) sum += g.w[q] * fn(mid + half * g.x[q]);
    return half * sum;
}

} // namespace perfusion
