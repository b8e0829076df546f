#include "perfusion/fields.hpp"

#include <cmath>

#include "perfusion/errors.hpp"

namespace perfusion {

// ---------------------------------------------------------------------------
// CutoffFunction
// ---------------------------------------------------------------------------
CutoffFunction CutoffFunction::for_epsilon(double eps) {
    const double band = std::pow(eps, 4.0 / 3.0);
    return {1.0 - 2.0 * band, 1.0 - band};
}

double CutoffFunction::value(double s) const {
    if (s <= s_inner) return 1.0;
    if (s >= s_outer) return 0.0;
    const double t = (s - s_inner) / (s_outer - s_inner);
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double CutoffFunction::deriv(double s) const {
    if (s <= s_inner || s >= s_outer) return 0.0;
    const double t = (s - s_inner) / (s_outer - s_inner);
    return -30.0 * t * t * (1.0 - t) * (1.0 - t) / (s_outer - s_inner);
}

// ---------------------------------------------------------------------------
// VelocityAnsatz
// ---------------------------------------------------------------------------
VelocityAnsatz::VelocityAnsatz(std::shared_ptr<const Solution1D> sol)
    : sol_(std::move(sol)), geom_(sol_->geom.get()), mu_(sol_->phys.mu),
      phi_(CutoffFunction::for_epsilon(sol_->geom->epsilon())) {}

double VelocityAnsatz::product_derivative(double r, double s, double c3, double c1) const {
    const double eps = geom_->epsilon();
    const RadiusSample rs = geom_->radius().eval(s);
    const double a = rs.a;
    const double a4 = a * a * a * a;
    const double g = sol_->flux(s);
    const double F = sol_->F_at(s);
    const double phi = phi_.value(s);
    const double dphi = phi_.deriv(s);
    const double poly = c3 * r * r * r + c1 * eps * eps * a * a * r;
    const double dp = g / a4;                          // p'
    const double d2p = F / a4 - 4.0 * rs.da * g / (a4 * a);  // p''
    return dphi * poly * dp + phi * (c1 * eps * eps * 2.0 * a * rs.da * r * dp + poly * d2p);
}

VelocityAnsatz::Components VelocityAnsatz::components(double r, double s) const {
    if (s < 0.0 || s > 1.0) throw DomainError("velocity_ansatz: s outside [0,1]");
    const double ra = geom_->surface_radius(s);
    if (r < 0.0 || r > ra * (1.0 + 1e-12))
        throw DomainError("velocity_ansatz: r outside the vessel cross-section");
    if (phi_.value(s) == 0.0) return {0.0, 0.0};  // cutoff zone: identically zero

    Components u;
    u.radial = -product_derivative(r, s, 1.0, -2.0) / (16.0 * mu_);
    // factored so the tangential part vanishes exactly on the surface
    const double dp = sol_->flux(s) / std::pow(geom_->radius().value(s), 4.0);
    u.axial = phi_.value(s) * (r - ra) * (r + ra) * dp / (4.0 * mu_);
    return u;
}

Vec3 VelocityAnsatz::cartesian(double r, double theta, double s) const {
    const Components u = components(r, s);
    const BishopFrame::Triad f = geom_->frame().at(s);
    const Vec3 e_r = std::cos(theta) * f.e1 + std::sin(theta) * f.e2;
    return u.radial * e_r + u.axial * f.e_t;
}

double VelocityAnsatz::divergence(double r, double theta, double s) const {
    if (s < 0.0 || s > 1.0) throw DomainError("ansatz_divergence: s outside [0,1]");
    const double ra = geom_->surface_radius(s);
    if (r < 0.0 || r > ra * (1.0 + 1e-12))
        throw DomainError("ansatz_divergence: r outside the vessel cross-section");
    if (phi_.value(s) == 0.0 && phi_.deriv(s) == 0.0) return 0.0;
    const double kh = geom_->kappa_hat(s, theta);
    if (kh == 0.0) return 0.0;
    return kh / (16.0 * mu_ * (1.0 - r * kh)) * product_derivative(r, s, 5.0, -6.0);
}

double VelocityAnsatz::wall_flux_density(double s, double theta) const {
    if (s < 0.0 || s > phi_.s_inner)
        throw CutoffZoneError("wall_flux_density is defined on the plateau s <= 1 - 2 eps^{4/3}");
    const double ra = geom_->surface_radius(s);
    const Components u = components(ra, s);
    const RadiusSample rs = geom_->radius().eval(s);
    const double eps = geom_->epsilon();
    const double gamma = std::sqrt(1.0 + eps * eps * rs.da * rs.da);
    const double u_dot_n = (u.radial - eps * rs.da * u.axial) / gamma;
    return u_dot_n * geom_->surface_jacobian(s, theta);
}

// ---------------------------------------------------------------------------
// ExteriorPressure
// ---------------------------------------------------------------------------
ExteriorPressure::ExteriorPressure(const KernelContext& ctx, std::shared_ptr<const Solution1D> sol)
    : sol_(std::move(sol)), op_(ctx, *sol_->geom, sol_->mesh.s),
      prefactor_(M_PI / (8.0 * sol_->phys.zeta * sol_->phys.mu)) {}

double ExteriorPressure::operator()(const Vec3& x) const {
    return prefactor_ * op_.apply(sol_->F, x);
}

double ExteriorPressure::at_surface(double s, double theta) const {
    return (*this)(sol_->geom->surface_point(s, theta));
}

double exterior_pressure(const KernelContext& ctx, const Solution1D& sol, const Vec3& x) {
    SnOperator op(ctx, *sol.geom, sol.mesh.s);
    return M_PI / (8.0 * sol.phys.zeta * sol.phys.mu) * op.apply(sol.F, x);
}

// ---------------------------------------------------------------------------
// theta variation
// ---------------------------------------------------------------------------
double theta_variation_at(const ExteriorPressure& q, double s, int n_theta) {
    const double dth = 2.0 * M_PI / n_theta;
    std::vector<double> vals(static_cast<std::size_t>(n_theta));
    double mean = 0.0;
    for (int l = 0; l < n_theta; ++l) {
        vals[static_cast<std::size_t>(l)] = q.at_surface(s, l * dth);
        mean += vals[static_cast<std::size_t>(l)];
    }
    mean /= n_theta;
    double dev2 = 0.0;
    for (double v : vals) dev2 += (v - mean) * (v - mean) * dth;
    return std::sqrt(dev2);
}

double theta_variation_surface(const ExteriorPressure& q, int n_theta) {
    const Solution1D& sol = q.solution();
    const VesselGeometry& geom = *sol.geom;
    const double dth = 2.0 * M_PI / n_theta;
    double total = 0.0;
    for (int i = 0; i < sol.mesh.nodes(); ++i) {
        const double s = sol.mesh.s[static_cast<std::size_t>(i)];
        std::vector<double> vals(static_cast<std::size_t>(n_theta));
        double mean = 0.0;
        for (int l = 0; l < n_theta; ++l) {
            vals[static_cast<std::size_t>(l)] = q.at_surface(s, l * dth);
            mean += vals[static_cast<std::size_t>(l)];
        }
        mean /= n_theta;
        double ring = 0.0;
        for (int l = 0; l < n_theta; ++l) {
            const double d = vals[static_cast<std::size_t>(l)] - mean;
            ring += d * d * geom.surface_jacobian(s, l * dth) * dth;
        }
        total += ring * sol.mesh.dual(i);
    }
    return std::sqrt(total);
}

// ---------------------------------------------------------------------------
// FieldSampleGrid
// ---------------------------------------------------------------------------
FieldSampleGrid FieldSampleGrid::box(const VesselGeometry& geom, const Vec3& lo, const Vec3& hi,
                                     const std::array<int, 3>& n) {
    if (n[0] < 1 || n[1] < 1 || n[2] < 1) throw ConfigError("box grid needs positive resolutions");
    FieldSampleGrid grid;
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k) {
                Vec3 x{lo.x + (hi.x - lo.x) * (n[0] == 1 ? 0.5 : i / double(n[0] - 1)),
                       lo.y + (hi.y - lo.y) * (n[1] == 1 ? 0.5 : j / double(n[1] - 1)),
                       lo.z + (hi.z - lo.z) * (n[2] == 1 ? 0.5 : k / double(n[2] - 1))};
                if (x.z < 0.0) continue;  // exterior samples live in the upper half space
                const auto c = geom.invert(x);
                Sample smp;
                smp.x = x;
                smp.r = c.r;
                smp.theta = c.theta;
                smp.s = c.s;
                smp.tag = c.inside ? Tag::Interior : Tag::Exterior;
                grid.points.push_back(smp);
            }
    return grid;
}

FieldSampleGrid FieldSampleGrid::surface_lattice(const VesselGeometry& geom, int n_s, int n_theta,
                                                 double s_max) {
    if (n_s < 1 || n_theta < 1) throw ConfigError("surface lattice needs positive resolutions");
    FieldSampleGrid grid;
    for (int i = 0; i < n_s; ++i) {
        const double s = s_max * (i + 0.5) / n_s;
        for (int l = 0; l < n_theta; ++l) {
            const double theta = 2.0 * M_PI * l / n_theta;
            Sample smp;
            smp.x = geom.surface_point(s, theta);
            smp.tag = Tag::Surface;
            smp.r = geom.surface_radius(s);
            smp.theta = theta;
            smp.s = s;
            grid.points.push_back(smp);
        }
    }
    return grid;
}

} // namespace perfusion
