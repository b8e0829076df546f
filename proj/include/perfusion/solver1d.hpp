#pragma once

#include <Eigen/Dense>
#include <memory>

#include "perfusion/geometry.hpp"
#include "perfusion/greens.hpp"
#include "perfusion/mesh1d.hpp"

namespace perfusion {

struct PhysicsParams {
    double mu = 1.0;
    double kappa = 1.0;
    double zeta = 1.0;
    double p0 = 1.0;
};

// ---------------------------------------------------------------------------
// Discretization of the degenerate 1D integrodifferential pressure equation
//   (a^4 p')' = F,
//   F(s) = 16 mu kappa a(s) p(s) - (kappa/zeta) a(s) int_0^{2pi} S_N[F] dtheta,
// with p(0) = p0 and zero tip flux a^4 p' at the last face replacing the
// boundary condition the degenerate coefficient does not admit.
// Unknowns are the nodal pair (p_i, F_i); the flux law uses a conservative
// face-centered second-order stencil so the total flux telescopes exactly.
// ---------------------------------------------------------------------------
struct System1D {
    Eigen::MatrixXd A;   // unscaled; rows: [dirichlet | flux rows 1..N | integral rows]
    Eigen::VectorXd rhs;
    Mesh1D mesh;
    PhysicsParams phys;
    std::shared_ptr<const VesselGeometry> geom;
    KernelContext ctx;

    int nodes() const { return mesh.nodes(); }
};

System1D assemble_system(std::shared_ptr<const VesselGeometry> geom, const KernelContext& ctx,
                         const Mesh1D& mesh, const PhysicsParams& phys);

class Solution1D {
  public:
    Mesh1D mesh;
    PhysicsParams phys;
    std::shared_ptr<const VesselGeometry> geom;
    std::vector<double> p;  // nodal interior pressure
    std::vector<double> F;  // nodal (a^4 p')'
    double boundary_flux = 0.0;  // a^4 p' at s = 0 (scheme-consistent value)
    double residual = 0.0;       // componentwise backward error of the solve

    /// Flux g(s) = a^4 p' as the exact integral of the piecewise-linear F.
    double flux(double s) const;
    double tip_face_flux() const;  // a^4 p' at the last interior face
    double pressure(double s) const;  // cubic Hermite through (p_i, g_i / a^4)
    double p_prime(double s) const;
    double F_at(double s) const;
    LineDensity density() const;  // F on the mesh nodes, for S_N

    double ha_norm() const;

  private:
    friend Solution1D solve_pressure(const System1D& system);
    std::vector<double> cumF_;  // cumulative integral of F at nodes
    int locate(double s) const;
};

Solution1D solve_pressure(const System1D& system);

/// Lemma-style a-priori ratios; all scale-invariant in p0 and expected to
/// stay bounded as eps shrinks.
struct AprioriRatios {
    double l2_p = 0.0;          // ||p||_L2 / |p0|
    double l2_a2dp = 0.0;       // ||a^2 p'||_L2 / |p0|
    double linf_p = 0.0;        // eps^{1/2} ||p||_inf / |p0|
    double linf_adp = 0.0;      // eps^{1/2} ||a p'||_inf / |p0|
    double linf_a3d2p = 0.0;    // eps^{1/2} ||a^3 p''||_inf / |p0|
};

AprioriRatios check_apriori_bounds(const Solution1D& sol);

} // namespace perfusion
