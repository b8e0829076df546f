#pragma once

#include <cmath>
#include <vector>

#include "perfusion/errors.hpp"

namespace perfusion {

/// 1D solver grid on [0, 1 - h_min], graded toward the degenerate tip.
/// Nodes come from the smooth map s = 1 - (1 - xi)^g of a uniform xi grid,
/// so spacing near the tip scales like (1-s)^{(g-1)/g}; g = 2 tracks the
/// spheroidal radius a ~ sqrt(2(1-s)).
struct Mesh1D {
    std::vector<double> s;
    double h_min = 0.0;
    double grading = 2.0;

    static Mesh1D graded(int n_cells, double h_min, double grading = 2.0) {
        if (n_cells < 2) throw ConfigError("mesh needs at least 2 cells");
        if (!(h_min > 0.0 && h_min < 0.5)) throw ConfigError("h_min must lie in (0, 0.5)");
        if (!(grading >= 1.0)) throw ConfigError("grading exponent must be >= 1");
        Mesh1D m;
        m.h_min = h_min;
        m.grading = grading;
        const double xi_max = 1.0 - std::pow(h_min, 1.0 / grading);
        m.s.resize(static_cast<std::size_t>(n_cells) + 1);
        for (int i = 0; i <= n_cells; ++i) {
            const double xi = xi_max * i / n_cells;
            m.s[static_cast<std::size_t>(i)] = 1.0 - std::pow(1.0 - xi, grading);
        }
        m.s.front() = 0.0;
        return m;
    }

    int cells() const { return static_cast<int>(s.size()) - 1; }
    int nodes() const { return static_cast<int>(s.size()); }
    double face(int i) const { return 0.5 * (s[static_cast<std::size_t>(i)] + s[static_cast<std::size_t>(i) + 1]); }
    double cell_width(int i) const { return s[static_cast<std::size_t>(i) + 1] - s[static_cast<std::size_t>(i)]; }

    /// Dual-cell length around node i (trapezoid-rule weight).
    double dual(int i) const {
        const int n = cells();
        if (i == 0) return 0.5 * cell_width(0);
        if (i == n) return 0.5 * cell_width(n - 1);
        return 0.5 * (s[static_cast<std::size_t>(i) + 1] - s[static_cast<std::size_t>(i) - 1]);
    }
};

} // namespace perfusion
