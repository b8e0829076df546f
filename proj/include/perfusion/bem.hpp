#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "perfusion/fields.hpp"
#include "perfusion/geometry.hpp"
#include "perfusion/greens.hpp"
#include "perfusion/mesh1d.hpp"
#include "perfusion/solver1d.hpp"

namespace perfusion {

// ---------------------------------------------------------------------------
// Panel discretization of a closed or tube-like surface patch. Panels are
// parameter rectangles with a collocation point at the parameter center;
// areas come from a 4x4 Gauss rule on the exact parameterization.
// ---------------------------------------------------------------------------
class PanelSurface {
  public:
    virtual ~PanelSurface() = default;
    virtual Vec3 point(double u, double v) const = 0;
    virtual double jacobian(double u, double v) const = 0;
    virtual Vec3 normal(double u, double v) const = 0;
};

struct Panel {
    double u0, u1, v0, v1;
    Vec3 x;       // collocation point
    Vec3 n;       // outward normal at the collocation point
    double area;  // quadrature of the surface Jacobian over the rectangle
    double diam;  // coarse diameter estimate
    int ring;     // s-station index (vessel meshes; -1 otherwise)
};

struct BoundaryMesh {
    std::shared_ptr<const PanelSurface> surface;
    std::vector<Panel> panels;
    int n_rings = 0;
    int n_theta = 0;
    std::vector<double> ring_s;  // ring-center stations (vessel meshes)
    Mesh1D mesh;                 // the 1D grid whose cells carry the rings
    std::shared_ptr<const VesselGeometry> geom;  // null for non-vessel meshes
    double total_area = 0.0;
};

/// Vessel surface mesh with one ring of panels per 1D mesh cell, so BEM
/// stations coincide with the 1D solver grid built from the same config.
BoundaryMesh build_boundary_mesh(std::shared_ptr<const VesselGeometry> geom, const Mesh1D& mesh,
                                 int n_theta);

/// Unit sphere lat-long mesh for the jump-relation oracle (free-space kernel).
BoundaryMesh build_sphere_mesh(int n_phi, int n_theta);

// ---------------------------------------------------------------------------
// Single-layer collocation for the coupled 3D-1D Darcy-Poiseuille system:
//   q(x) = sum_j sigma_j int_{panel j} G_N(x,y) dS(y),
//   Robin rows   -dq/dn = (kappa / zeta eps)(p(s) - q)          per panel,
//   averaged rows int dq/dn J dtheta = -(pi/8 zeta mu)(a^4 p')'  per station,
//   p(0) = p0 and zero tip flux close the 1D block.
// The exterior trace of the normal derivative is -sigma/2 + K'sigma with n
// pointing out of the vessel.
// ---------------------------------------------------------------------------
struct BemOptions {
    KernelVariant kernel = KernelVariant::HalfSpaceNeumann;
    double near_factor = 3.0;  // panel-diameter multiple switching to tensor Gauss
    int order_near = 6;
    int order_self = 4;        // polar (Duffy-style) rule on the singular panel
    bool keep_single_layer = true;
};

struct BemSystem {
    Eigen::MatrixXd A;
    Eigen::VectorXd rhs;
    std::optional<Eigen::MatrixXd> V;  // single-layer traces at collocation points
    BoundaryMesh mesh;
    PhysicsParams phys;
    BemOptions opts;

    int n_panels() const { return static_cast<int>(mesh.panels.size()); }
    int n_pressure() const { return mesh.n_rings + 2; }
};

BemSystem assemble_bem(const BoundaryMesh& mesh, const PhysicsParams& phys,
                       const BemOptions& opts = {});

class BemSolution {
  public:
    BoundaryMesh mesh;
    PhysicsParams phys;
    BemOptions opts;
    std::vector<double> sigma;       // per panel
    std::vector<double> p_station;   // per ring center
    double p_inlet = 0.0;            // node at s = 0
    double p_tip = 0.0;              // node at s = 1 - h_min
    double residual = 0.0;
    std::optional<Eigen::MatrixXd> V;

    /// Single-layer evaluation anywhere in the closed exterior.
    double q(const Vec3& x) const;
    /// Trace of q at collocation point j (from the stored V block).
    double q_surface(int j) const;
    /// Exterior normal derivative at collocation j via the Robin identity.
    double dqdn(int j) const;
    /// Discrete inlet flux a^4 p'(0).
    double inlet_flux() const;
    /// Nodal 1D pressure locations and values: (0, ring centers..., s_N).
    std::vector<double> pressure_nodes() const;
    std::vector<double> pressure_values() const;
};

BemSolution solve_bem(const BemSystem& system);

/// (jump_sign * sigma + K' sigma) at every collocation point; the exterior
/// jump relation has jump_sign = -1/2. Exposed for the sphere oracle and the
/// flipped-sign failure demonstration.
std::vector<double> apply_normal_derivative(const BoundaryMesh& mesh, KernelVariant kernel,
                                            std::span<const double> sigma,
                                            double jump_sign = -0.5,
                                            const BemOptions& opts = {});

// ---------------------------------------------------------------------------
// 3D-1D vs 1D comparison (the desk-scale convergence target).
// ---------------------------------------------------------------------------
struct CompareReport {
    double ha_error = 0.0;           // ||p_bem - p_sb||_{H^a} on shared stations
    double surface_mismatch = 0.0;   // ||(p_sb - p) - (q_sb - q)||_{L2(Gamma)}
    double gradient_proxy_rms = 0.0; // RMS |grad q| difference over fixed probes
    double conservation_rel = 0.0;   // wall flux vs inlet Poiseuille flux
    double ha_p_ratio = 0.0;         // ||p||_{H^a} / |p0|
    double pq_gap_ratio = 0.0;       // |Gamma|^{-1/2} ||p - q||_{L2(Gamma)} / |p0|
    double bem_ha_norm = 0.0;
    double sb_ha_norm = 0.0;
};

/// Fixed exterior probe points shared by every sweep entry.
std::vector<Vec3> exterior_probe_points();

CompareReport compare_to_1d(const BemSolution& bem, const Solution1D& sol,
                            const KernelContext& ctx);

} // namespace perfusion
