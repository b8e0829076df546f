#pragma once

#include <functional>
#include <span>
#include <vector>

#include "perfusion/geometry.hpp"
#include "perfusion/vec3.hpp"

namespace perfusion {

// ---------------------------------------------------------------------------
// Half-space Neumann Green's function for the Laplacian,
//   G_N(x,y) = (1/4pi) (1/|x-y| + 1/|x-y*|),  y* the reflection across z=0,
// and the slender-body line operator
//   S_N[f](x) = int_0^1 G_N(x, X(sqrt(1-eps^2) t)) f(t) dt.
// The endpoint pullback keeps the kernel off the tip so S_N is finite on the
// whole vessel surface.
// ---------------------------------------------------------------------------

enum class KernelVariant {
    HalfSpaceNeumann,  // image kernel, wall-flux free at z = 0
    FreeSpaceTest,     // 1/(4pi|x-y|) only, for oracles
};

struct KernelContext {
    KernelVariant variant = KernelVariant::HalfSpaceNeumann;
    double proximity_factor = 3.0;  // switch to subtracted quadrature below this multiple of eps*a
    int order_regular = 8;          // Gauss order on grid panels
    int order_singular = 8;         // Gauss order on graded panels near the projection
    int n_theta = 16;               // trapezoid points for surface averages
    bool enable_subtraction = true; // off = plain composite quadrature everywhere
};

/// Point evaluation of the kernel. Throws SingularityError at coincident points.
double eval_green(const KernelContext& ctx, const Vec3& x, const Vec3& y);

/// Nodal line density f(t) on a strictly increasing grid with t in [0,1];
/// piecewise linear between nodes, constant past the last node.
struct LineDensity {
    std::vector<double> t;
    std::vector<double> f;

    LineDensity() = default;
    LineDensity(std::vector<double> grid, std::vector<double> values);
    double value(double ti) const;
};

/// S_N bound to one geometry and one density grid. Precomputes the regular
/// quadrature (panel nodes, curve points, hat-function indices) once, so both
/// point evaluations and weight-row assembly stay cheap.
class SnOperator {
  public:
    SnOperator(const KernelContext& ctx, const VesselGeometry& geom, std::vector<double> tgrid);

    const std::vector<double>& grid() const { return tgrid_; }
    const KernelContext& context() const { return ctx_; }

    /// S_N[f](x) for nodal values f on the bound grid.
    double apply(std::span<const double> f, const Vec3& x) const;

    /// Row of weights w such that apply(f, x) = sum_j w_j f_j.
    void weights(const Vec3& x, std::span<double> w) const;

    /// int_0^{2pi} S_N[f](surface(s,theta)) dtheta by the periodic trapezoid rule.
    double surface_average(std::span<const double> f, double s) const;
    void surface_average_weights(double s, std::span<double> w) const;

  private:
    struct RegularNode {
        double t, w;     // quadrature node and weight
        Vec3 p;          // X(beta t)
        int cell;        // hat-function support cell (index of left grid node)
        double lambda;   // barycentric coordinate in the cell; cell = last-1, lambda = 1 in the tail
    };

    void accumulate(const Vec3& x, const std::function<void(int, double)>& sink) const;
    void accumulate_part(const Vec3& x, bool image,
                         const std::function<void(int, double)>& sink) const;
    Vec3 curve_point(double t, bool image) const;
    Vec3 curve_tangent(double t, bool image) const;   // d/dt X(beta t), possibly reflected
    Vec3 curve_curv(double t, bool image) const;

    KernelContext ctx_;
    const VesselGeometry* geom_;
    std::vector<double> tgrid_;
    double beta_;  // sqrt(1 - eps^2)
    std::vector<RegularNode> nodes_;
    double max_cell_ = 0.0;
    void density_stencil(double t, int& cell, double& lambda) const;
};

/// One-shot convenience wrappers matching the operator methods.
double sn_apply(const KernelContext& ctx, const VesselGeometry& geom, const LineDensity& f,
                const Vec3& x);
double sn_surface_average(const KernelContext& ctx, const VesselGeometry& geom,
                          const LineDensity& f, double s);

} // namespace perfusion
