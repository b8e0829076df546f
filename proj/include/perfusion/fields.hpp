#pragma once

#include <array>
#include <memory>
#include <vector>

#include "perfusion/greens.hpp"
#include "perfusion/solver1d.hpp"

namespace perfusion {

// ---------------------------------------------------------------------------
// Smooth tip cutoff: 1 below 1 - 2 eps^{4/3}, 0 above 1 - eps^{4/3},
// quintic smoothstep in between (|phi'| <= 1.875 eps^{-4/3}).
// ---------------------------------------------------------------------------
struct CutoffFunction {
    double s_inner = 0.0;
    double s_outer = 0.0;

    static CutoffFunction for_epsilon(double eps);
    double value(double s) const;
    double deriv(double s) const;
};

// ---------------------------------------------------------------------------
// Poiseuille-type velocity ansatz built from the 1D pressure:
//   U = -(1/16 mu) d/ds[ phi (r^3 - 2(eps a)^2 r) p' ] e_r
//       + (1/4 mu)  phi (r^2 - (eps a)^2) p'  e_t,
// differentiated at fixed (r, theta) labels. p' is reconstructed from the
// solver flux g = a^4 p', whose s-derivative is the nodal F exactly, so the
// straight-geometry wall-flux identity holds to roundoff.
// ---------------------------------------------------------------------------
class VelocityAnsatz {
  public:
    explicit VelocityAnsatz(std::shared_ptr<const Solution1D> sol);

    struct Components {
        double radial = 0.0;  // along e_r
        double axial = 0.0;   // along e_t
    };

    Components components(double r, double s) const;
    Vec3 cartesian(double r, double theta, double s) const;

    /// Exact curvilinear divergence of the ansatz:
    ///   div U = kappa_hat / (16 mu (1 - r kappa_hat)) d/ds[ phi (5r^3 - 6(eps a)^2 r) p' ].
    double divergence(double r, double theta, double s) const;

    /// (U . n) J_eps at the surface; for straight centerlines this equals
    /// (eps^4 / 16 mu) (a^4 p')'. Only defined on the cutoff plateau.
    double wall_flux_density(double s, double theta) const;

    const CutoffFunction& cutoff() const { return phi_; }
    const Solution1D& solution() const { return *sol_; }

  private:
    // d/ds [ phi (c3 r^3 + c1 (eps a)^2 r) g / a^4 ] at fixed r
    double product_derivative(double r, double s, double c3, double c1) const;

    std::shared_ptr<const Solution1D> sol_;
    const VesselGeometry* geom_;
    double mu_;
    CutoffFunction phi_;
};

// ---------------------------------------------------------------------------
// Exterior slender-body pressure q^SB = (pi / 8 zeta mu) S_N[(a^4 p')'].
// ---------------------------------------------------------------------------
class ExteriorPressure {
  public:
    ExteriorPressure(const KernelContext& ctx, std::shared_ptr<const Solution1D> sol);

    double operator()(const Vec3& x) const;          // throws DomainError inside the vessel
    double at_surface(double s, double theta) const;

    const Solution1D& solution() const { return *sol_; }

  private:
    std::shared_ptr<const Solution1D> sol_;
    SnOperator op_;
    double prefactor_;
};

double exterior_pressure(const KernelContext& ctx, const Solution1D& sol, const Vec3& x);

/// L2(theta) deviation of q^SB from its theta-mean at one cross-section.
double theta_variation_at(const ExteriorPressure& q, double s, int n_theta);

/// Full-surface deviation ||q^SB - mean_theta q^SB||_{L2(Gamma_eps)} over the
/// solver mesh (s <= 1 - h_min).
double theta_variation_surface(const ExteriorPressure& q, int n_theta);

// ---------------------------------------------------------------------------
// Field sampling grids for CSV export.
// ---------------------------------------------------------------------------
struct FieldSampleGrid {
    enum class Tag { Exterior, Interior, Surface };
    struct Sample {
        Vec3 x;
        Tag tag;
        double r = 0.0, theta = 0.0, s = 0.0;
    };
    std::vector<Sample> points;

    static FieldSampleGrid box(const VesselGeometry& geom, const Vec3& lo, const Vec3& hi,
                               const std::array<int, 3>& n);
    static FieldSampleGrid surface_lattice(const VesselGeometry& geom, int n_s, int n_theta,
                                           double s_max);
};

} // namespace perfusion
