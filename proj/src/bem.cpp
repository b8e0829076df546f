#include "perfusion/bem.hpp"

#include <algorithm>
#include <cmath>

#include "perfusion/errors.hpp"
#include "perfusion/norms.hpp"
#include "perfusion/parallel.hpp"
#include "perfusion/quadrature.hpp"

namespace perfusion {

namespace {

constexpr double kFourPi = 4.0 * M_PI;

double sl_kernel(const Vec3& x, const Vec3& y) { return 1.0 / (kFourPi * dist(x, y)); }

double dn_kernel(const Vec3& x, const Vec3& y, const Vec3& n_x) {
    const Vec3 d = x - y;
    const double r = norm(d);
    return -dot(d, n_x) / (kFourPi * r * r * r);
}

// ---------------------------------------------------------------------------
// Surface patches
// ---------------------------------------------------------------------------
class VesselPatch final : public PanelSurface {
  public:
    explicit VesselPatch(std::shared_ptr<const VesselGeometry> geom) : geom_(std::move(geom)) {}
    Vec3 point(double s, double theta) const override { return geom_->surface_point(s, theta); }
    double jacobian(double s, double theta) const override {
        return geom_->surface_jacobian(s, theta);
    }
    Vec3 normal(double s, double theta) const override { return geom_->surface_normal(s, theta); }

  private:
    std::shared_ptr<const VesselGeometry> geom_;
};

class SpherePatch final : public PanelSurface {
  public:
    Vec3 point(double phi, double theta) const override {
        return {std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta), std::cos(phi)};
    }
    double jacobian(double phi, double) const override { return std::sin(phi); }
    Vec3 normal(double phi, double theta) const override { return point(phi, theta); }
};

double panel_area(const PanelSurface& surf, const Panel& p) {
    const GaussRule& g = gauss_rule(4);
    double area = 0.0;
    const double um = 0.5 * (p.u0 + p.u1), uh = 0.5 * (p.u1 - p.u0);
    const double vm = 0.5 * (p.v0 + p.v1), vh = 0.5 * (p.v1 - p.v0);
    for (std::size_t a = 0; a < g.x.size(); ++a)
        for (std::size_t b = 0; b < g.x.size(); ++b)
            area += g.w[a] * g.w[b] * surf.jacobian(um + uh * g.x[a], vm + vh * g.x[b]);
    return area * uh * vh;
}

double panel_diameter(const PanelSurface& surf, const Panel& p) {
    const Vec3 c = surf.point(0.5 * (p.u0 + p.u1), 0.5 * (p.v0 + p.v1));
    double d = 0.0;
    for (double u : {p.u0, p.u1})
        for (double v : {p.v0, p.v1}) d = std::max(d, dist(c, surf.point(u, v)));
    return 2.0 * d;
}

// tangent-plane metric scales at the collocation parameters (finite differences)
void metric_scales(const PanelSurface& surf, const Panel& p, double& lu, double& lv) {
    const double uc = 0.5 * (p.u0 + p.u1), vc = 0.5 * (p.v0 + p.v1);
    const double hu = 1e-5 * (p.u1 - p.u0), hv = 1e-5 * (p.v1 - p.v0);
    lu = norm(surf.point(uc + hu, vc) - surf.point(uc - hu, vc)) / (2.0 * hu);
    lv = norm(surf.point(uc, vc + hv) - surf.point(uc, vc - hv)) / (2.0 * hv);
    lu = std::max(lu, 1e-12);
    lv = std::max(lv, 1e-12);
}

// polar rule around the collocation point in metric-scaled parameters; kills
// the 1/R singularity of both kernels through the rho Jacobian
template <class F>
double polar_self_integrate(const PanelSurface& surf, const Panel& p, int order, F&& fuv) {
    const double uc = 0.5 * (p.u0 + p.u1), vc = 0.5 * (p.v0 + p.v1);
    double lu = 1.0, lv = 1.0;
    metric_scales(surf, p, lu, lv);
    struct P2 {
        double a, b;
    };
    const P2 corners[4] = {{(p.u0 - uc) * lu, (p.v0 - vc) * lv},
                           {(p.u1 - uc) * lu, (p.v0 - vc) * lv},
                           {(p.u1 - uc) * lu, (p.v1 - vc) * lv},
                           {(p.u0 - uc) * lu, (p.v1 - vc) * lv}};
    const GaussRule& g = gauss_rule(order);
    double sum = 0.0;
    for (int e = 0; e < 4; ++e) {
        const P2 A = corners[e];
        const P2 B = corners[(e + 1) % 4];
        const double psi_a = std::atan2(A.b, A.a);
        double dpsi = std::atan2(B.b, B.a) - psi_a;
        while (dpsi <= -M_PI) dpsi += 2.0 * M_PI;
        while (dpsi > M_PI) dpsi -= 2.0 * M_PI;
        // inward edge normal and offset
        double nx = -(B.b - A.b), ny = B.a - A.a;
        const double nn = std::hypot(nx, ny);
        nx /= nn;
        ny /= nn;
        double c = nx * A.a + ny * A.b;
        if (c < 0.0) {
            nx = -nx;
            ny = -ny;
            c = -c;
        }
        for (std::size_t qa = 0; qa < g.x.size(); ++qa) {
            const double psi = psi_a + dpsi * 0.5 * (g.x[qa] + 1.0);
            const double wpsi = 0.5 * std::abs(dpsi) * g.w[qa];
            const double ca = std::cos(psi), sb = std::sin(psi);
            const double denom = nx * ca + ny * sb;
            if (denom <= 1e-14) continue;
            const double R = c / denom;
            for (std::size_t qr = 0; qr < g.x.size(); ++qr) {
                const double rho = R * 0.5 * (g.x[qr] + 1.0);
                const double wr = R * 0.5 * g.w[qr];
                const double u = uc + rho * ca / lu;
                const double v = vc + rho * sb / lv;
                sum += wpsi * wr * rho * fuv(u, v) / (lu * lv);
            }
        }
    }
    return sum;
}

template <class F>
double tensor_integrate(const Panel& p, int order, int split, F&& fuv) {
    const GaussRule& g = gauss_rule(order);
    double sum = 0.0;
    for (int su = 0; su < split; ++su)
        for (int sv = 0; sv < split; ++sv) {
            const double u0 = p.u0 + (p.u1 - p.u0) * su / split;
            const double u1 = p.u0 + (p.u1 - p.u0) * (su + 1) / split;
            const double v0 = p.v0 + (p.v1 - p.v0) * sv / split;
            const double v1 = p.v0 + (p.v1 - p.v0) * (sv + 1) / split;
            const double um = 0.5 * (u0 + u1), uh = 0.5 * (u1 - u0);
            const double vm = 0.5 * (v0 + v1), vh = 0.5 * (v1 - v0);
            for (std::size_t a = 0; a < g.x.size(); ++a)
                for (std::size_t b = 0; b < g.x.size(); ++b)
                    sum += uh * vh * g.w[a] * g.w[b] * fuv(um + uh * g.x[a], vm + vh * g.x[b]);
        }
    return sum;
}

struct PanelIntegrals {
    double V = 0.0;   // int G dS
    double Kp = 0.0;  // int dG/dn_x dS
};

// direct or image contribution of one panel seen from collocation point x
PanelIntegrals panel_part(const PanelSurface& surf, const Panel& p, const Vec3& x, const Vec3& n_x,
                          bool image, bool self, double target_scale, const BemOptions& opts) {
    auto yfn = [&](double u, double v) {
        const Vec3 y = surf.point(u, v);
        return image ? reflect_z(y) : y;
    };
    PanelIntegrals out;
    const Vec3 yc = image ? reflect_z(p.x) : p.x;
    const double d = dist(x, yc);
    if (self && !image) {
        out.V = polar_self_integrate(surf, p, opts.order_self, [&](double u, double v) {
            return sl_kernel(x, yfn(u, v)) * surf.jacobian(u, v);
        });
        out.Kp = polar_self_integrate(surf, p, opts.order_self, [&](double u, double v) {
            return dn_kernel(x, yfn(u, v), n_x) * surf.jacobian(u, v);
        });
        return out;
    }
    if (d < opts.near_factor * std::max(p.diam, target_scale)) {
        // adjacent panels see a near-singular kernel at the shared edge;
        // subdivide harder the closer the target sits
        const int split = d < 1.0 * p.diam ? 4 : (d < 2.0 * p.diam ? 2 : 1);
        out.V = tensor_integrate(p, opts.order_near, split, [&](double u, double v) {
            return sl_kernel(x, yfn(u, v)) * surf.jacobian(u, v);
        });
        out.Kp = tensor_integrate(p, opts.order_near, split, [&](double u, double v) {
            return dn_kernel(x, yfn(u, v), n_x) * surf.jacobian(u, v);
        });
        return out;
    }
    out.V = sl_kernel(x, yc) * p.area;
    out.Kp = dn_kernel(x, yc, n_x) * p.area;
    return out;
}

PanelIntegrals panel_integrals(const PanelSurface& surf, const Panel& p, const Vec3& x,
                               const Vec3& n_x, bool self, KernelVariant kernel,
                               double target_scale, const BemOptions& opts) {
    PanelIntegrals out = panel_part(surf, p, x, n_x, false, self, target_scale, opts);
    if (kernel == KernelVariant::HalfSpaceNeumann) {
        const PanelIntegrals img = panel_part(surf, p, x, n_x, true, false, target_scale, opts);
        out.V += img.V;
        out.Kp += img.Kp;
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Mesh builders
// ---------------------------------------------------------------------------
BoundaryMesh build_boundary_mesh(std::shared_ptr<const VesselGeometry> geom, const Mesh1D& mesh,
                                 int n_theta) {
    if (n_theta < 8) throw ConfigError("boundary mesh needs n_theta >= 8");
    BoundaryMesh bm;
    bm.geom = geom;
    bm.surface = std::make_shared<VesselPatch>(geom);
    bm.mesh = mesh;
    bm.n_rings = mesh.cells();
    bm.n_theta = n_theta;
    const double dth = 2.0 * M_PI / n_theta;
    bm.panels.reserve(static_cast<std::size_t>(bm.n_rings) * n_theta);
    for (int k = 0; k < bm.n_rings; ++k) {
        const double sc = mesh.face(k);
        bm.ring_s.push_back(sc);
        for (int l = 0; l < n_theta; ++l) {
            Panel p;
            p.u0 = mesh.s[static_cast<std::size_t>(k)];
            p.u1 = mesh.s[static_cast<std::size_t>(k) + 1];
            p.v0 = l * dth;
            p.v1 = (l + 1) * dth;
            p.ring = k;
            p.x = bm.surface->point(sc, 0.5 * (p.v0 + p.v1));
            p.n = bm.surface->normal(sc, 0.5 * (p.v0 + p.v1));
            p.area = panel_area(*bm.surface, p);
            p.diam = panel_diameter(*bm.surface, p);
            bm.panels.push_back(p);
            bm.total_area += p.area;
        }
    }
    return bm;
}

BoundaryMesh build_sphere_mesh(int n_phi, int n_theta) {
    if (n_phi < 4 || n_theta < 8) throw ConfigError("sphere mesh needs n_phi >= 4, n_theta >= 8");
    BoundaryMesh bm;
    bm.surface = std::make_shared<SpherePatch>();
    bm.n_rings = 0;
    bm.n_theta = n_theta;
    const double dphi = M_PI / n_phi;
    const double dth = 2.0 * M_PI / n_theta;
    for (int k = 0; k < n_phi; ++k)
        for (int l = 0; l < n_theta; ++l) {
            Panel p;
            p.u0 = k * dphi;
            p.u1 = (k + 1) * dphi;
            p.v0 = l * dth;
            p.v1 = (l + 1) * dth;
            p.ring = -1;
            const double pc = 0.5 * (p.u0 + p.u1), tc = 0.5 * (p.v0 + p.v1);
            p.x = bm.surface->point(pc, tc);
            p.n = bm.surface->normal(pc, tc);
            p.area = panel_area(*bm.surface, p);
            p.diam = panel_diameter(*bm.surface, p);
            bm.panels.push_back(p);
            bm.total_area += p.area;
        }
    return bm;
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------
BemSystem assemble_bem(const BoundaryMesh& mesh, const PhysicsParams& phys,
                       const BemOptions& opts) {
    if (!mesh.geom) throw ConfigError("assemble_bem needs a vessel boundary mesh");
    if (!(phys.mu > 0.0 && phys.zeta > 0.0 && phys.kappa >= 0.0))
        throw ConfigError("physics constants must be positive (kappa may be zero)");

    const int np = static_cast<int>(mesh.panels.size());
    const int N = mesh.n_rings;
    const int n = np + N + 2;
    const double eps = mesh.geom->epsilon();
    const double c_rob = phys.kappa / (phys.zeta * eps);
    const double c_pois = M_PI / (8.0 * phys.zeta * phys.mu);

    BemSystem sys;
    sys.mesh = mesh;
    sys.phys = phys;
    sys.opts = opts;
    sys.A = Eigen::MatrixXd::Zero(n, n);
    sys.rhs = Eigen::VectorXd::Zero(n);
    if (opts.keep_single_layer) sys.V = Eigen::MatrixXd::Zero(np, np);

    const RadiusProfile& radius = mesh.geom->radius();
    auto a4_at = [&](double s) {
        const double a = radius.value(s);
        return a * a * a * a;
    };

    // 1D flux faces: p nodes at (0, ring centers..., s_N); face k sits at mesh
    // node s_k. Column index helpers:
    const int col_p0 = np + N;      // inlet node b0
    const int col_ptip = np + N + 1;  // tip node b1
    auto col_center = [&](int k) { return np + k; };

    struct Face {
        int lo, hi;   // column indices
        double coef;  // a^4 / node spacing
    };
    std::vector<Face> faces(static_cast<std::size_t>(N) + 1);
    faces[0] = {col_p0, col_center(0), a4_at(0.0) / (mesh.ring_s[0] - 0.0)};
    for (int k = 1; k < N; ++k)
        faces[static_cast<std::size_t>(k)] = {col_center(k - 1), col_center(k),
                                              a4_at(mesh.mesh.s[static_cast<std::size_t>(k)]) /
                                                  (mesh.ring_s[static_cast<std::size_t>(k)] -
                                                   mesh.ring_s[static_cast<std::size_t>(k) - 1])};
    faces[static_cast<std::size_t>(N)] = {col_center(N - 1), col_ptip,
                                          a4_at(mesh.mesh.s.back()) /
                                              (mesh.mesh.s.back() - mesh.ring_s.back())};

    // panel rows ring by ring; rings write disjoint rows so this parallelizes
    par::parallel_for(N, [&](std::int64_t kk) {
        const int k = static_cast<int>(kk);
        const int row_avg = np + k;
        std::vector<double> vrow(static_cast<std::size_t>(np));
        std::vector<double> krow(static_cast<std::size_t>(np));
        for (int i = k * mesh.n_theta; i < (k + 1) * mesh.n_theta; ++i) {
            const Panel& pi = mesh.panels[static_cast<std::size_t>(i)];
            for (int j = 0; j < np; ++j) {
                const PanelIntegrals pij =
                    panel_integrals(*mesh.surface, mesh.panels[static_cast<std::size_t>(j)], pi.x,
                                    pi.n, i == j, opts.kernel, pi.diam, opts);
                vrow[static_cast<std::size_t>(j)] = pij.V;
                krow[static_cast<std::size_t>(j)] = pij.Kp;
            }
            if (sys.V)
                for (int j = 0; j < np; ++j) (*sys.V)(i, j) = vrow[static_cast<std::size_t>(j)];
            // Robin row: sigma_i/2 - K' sigma + c_rob (V sigma - p(station)) = 0
            sys.A(i, i) += 0.5;
            for (int j = 0; j < np; ++j)
                sys.A(i, j) += -krow[static_cast<std::size_t>(j)] + c_rob * vrow[static_cast<std::size_t>(j)];
            sys.A(i, col_center(k)) -= c_rob;
            // averaged row: area-weighted normal derivative of this ring
            sys.A(row_avg, i) += -0.5 * pi.area;
            for (int j = 0; j < np; ++j) sys.A(row_avg, j) += pi.area * krow[static_cast<std::size_t>(j)];
        }
        // + (pi / 8 zeta mu) (Phi_{k+1} - Phi_k)
        const Face& fhi = faces[static_cast<std::size_t>(k) + 1];
        const Face& flo = faces[static_cast<std::size_t>(k)];
        sys.A(row_avg, fhi.hi) += c_pois * fhi.coef;
        sys.A(row_avg, fhi.lo) -= c_pois * fhi.coef;
        sys.A(row_avg, flo.hi) -= c_pois * flo.coef;
        sys.A(row_avg, flo.lo) += c_pois * flo.coef;
    });

    // closures: inlet pressure and zero tip flux
    sys.A(np + N, col_p0) = 1.0;
    sys.rhs(np + N) = phys.p0;
    sys.A(np + N + 1, col_ptip) = 1.0;
    sys.A(np + N + 1, col_center(N - 1)) = -1.0;
    return sys;
}

BemSolution solve_bem(const BemSystem& system) {
    const int n = static_cast<int>(system.A.rows());
    Eigen::MatrixXd A = system.A;
    Eigen::VectorXd b = system.rhs;
    for (int r = 0; r < n; ++r) {
        const double scale = A.row(r).cwiseAbs().maxCoeff();
        if (scale == 0.0) throw ConditioningError("singular BEM system (zero row)");
        A.row(r) /= scale;
        b(r) /= scale;
    }
    // in-place factorization; the residual check below uses the pristine system
    Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXd>> lu(A);
    const Eigen::VectorXd x = lu.solve(b);
    if (!x.allFinite()) throw ConditioningError("singular BEM system");
    const Eigen::VectorXd r = system.A * x - system.rhs;
    const Eigen::VectorXd denom = system.A.cwiseAbs() * x.cwiseAbs() + system.rhs.cwiseAbs();
    double backward = 0.0;
    for (int i = 0; i < n; ++i)
        if (denom(i) > 0.0) backward = std::max(backward, std::abs(r(i)) / denom(i));
    if (backward > 1e-8)
        throw ConvergenceError("BEM residual " + std::to_string(backward) + " exceeds 1e-8");

    BemSolution sol;
    sol.mesh = system.mesh;
    sol.phys = system.phys;
    sol.opts = system.opts;
    sol.residual = backward;
    sol.V = system.V;
    const int np = system.n_panels();
    const int N = system.mesh.n_rings;
    sol.sigma.resize(static_cast<std::size_t>(np));
    for (int i = 0; i < np; ++i) sol.sigma[static_cast<std::size_t>(i)] = x(i);
    sol.p_station.resize(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) sol.p_station[static_cast<std::size_t>(k)] = x(np + k);
    sol.p_inlet = x(np + N);
    sol.p_tip = x(np + N + 1);
    return sol;
}

double BemSolution::q(const Vec3& x) const {
    double sum = 0.0;
    for (std::size_t j = 0; j < mesh.panels.size(); ++j) {
        const Panel& p = mesh.panels[j];
        const PanelIntegrals pi =
            panel_integrals(*mesh.surface, p, x, Vec3{0, 0, 1}, false, opts.kernel, 0.0, opts);
        sum += sigma[j] * pi.V;
    }
    return sum;
}

double BemSolution::q_surface(int j) const {
    if (!V) throw ConfigError("single-layer block was not stored");
    double sum = 0.0;
    for (int l = 0; l < static_cast<int>(sigma.size()); ++l)
        sum += (*V)(j, l) * sigma[static_cast<std::size_t>(l)];
    return sum;
}

double BemSolution::dqdn(int j) const {
    const double eps = mesh.geom->epsilon();
    const double c_rob = phys.kappa / (phys.zeta * eps);
    const int ring = mesh.panels[static_cast<std::size_t>(j)].ring;
    return -c_rob * (p_station[static_cast<std::size_t>(ring)] - q_surface(j));
}

double BemSolution::inlet_flux() const {
    const double a = mesh.geom->radius().value(0.0);
    return a * a * a * a * (p_station.front() - p_inlet) / mesh.ring_s.front();
}

std::vector<double> BemSolution::pressure_nodes() const {
    std::vector<double> loc;
    loc.push_back(0.0);
    loc.insert(loc.end(), mesh.ring_s.begin(), mesh.ring_s.end());
    loc.push_back(mesh.mesh.s.back());
    return loc;
}

std::vector<double> BemSolution::pressure_values() const {
    std::vector<double> v;
    v.push_back(p_inlet);
    v.insert(v.end(), p_station.begin(), p_station.end());
    v.push_back(p_tip);
    return v;
}

std::vector<double> apply_normal_derivative(const BoundaryMesh& mesh, KernelVariant kernel,
                                            std::span<const double> sigma, double jump_sign,
                                            const BemOptions& opts) {
    const int np = static_cast<int>(mesh.panels.size());
    if (static_cast<int>(sigma.size()) != np)
        throw ConfigError("normal derivative: density size mismatch");
    std::vector<double> out(static_cast<std::size_t>(np), 0.0);
    par::parallel_for(np, [&](std::int64_t ii) {
        const int i = static_cast<int>(ii);
        const Panel& pi = mesh.panels[static_cast<std::size_t>(i)];
        double sum = jump_sign * sigma[static_cast<std::size_t>(i)];
        for (int j = 0; j < np; ++j) {
            const PanelIntegrals pij =
                panel_integrals(*mesh.surface, mesh.panels[static_cast<std::size_t>(j)], pi.x,
                                pi.n, i == j, kernel, pi.diam, opts);
            sum += pij.Kp * sigma[static_cast<std::size_t>(j)];
        }
        out[static_cast<std::size_t>(i)] = sum;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Comparison against the 1D model
// ---------------------------------------------------------------------------
std::vector<Vec3> exterior_probe_points() {
    return {{0.5, 0.5, 0.3},  {-0.4, 0.3, 0.6}, {0.3, -0.5, 0.9}, {-0.5, -0.4, 0.4},
            {0.9, 0.0, 0.5},  {-0.7, 0.2, 0.8}, {0.0, 0.7, 0.7},  {0.2, 0.3, 1.4},
            {-0.3, -0.3, 1.1}, {0.8, -0.4, 1.0}, {0.05, 0.9, 0.2}, {-0.6, 0.5, 1.3}};
}

CompareReport compare_to_1d(const BemSolution& bem, const Solution1D& sol,
                            const KernelContext& ctx) {
    const Mesh1D& m1 = bem.mesh.mesh;
    const Mesh1D& m2 = sol.mesh;
    if (m1.nodes() != m2.nodes())
        throw ConfigError("compare_to_1d: meshes differ in size");
    for (int i = 0; i < m1.nodes(); ++i)
        if (std::abs(m1.s[static_cast<std::size_t>(i)] - m2.s[static_cast<std::size_t>(i)]) > 1e-12)
            throw ConfigError("compare_to_1d: s-stations do not coincide");
    if (std::abs(bem.mesh.geom->epsilon() - sol.geom->epsilon()) > 1e-15)
        throw ConfigError("compare_to_1d: geometry epsilon differs");

    CompareReport rep;
    const double p0 = std::abs(sol.phys.p0);
    const RadiusProfile& radius = sol.geom->radius();

    // H^a error on the shared stations
    const std::vector<double> locs = bem.pressure_nodes();
    const std::vector<double> pb = bem.pressure_values();
    std::vector<double> diff(locs.size()), psb(locs.size());
    for (std::size_t i = 0; i < locs.size(); ++i) {
        psb[i] = sol.pressure(locs[i]);
        diff[i] = pb[i] - psb[i];
    }
    rep.ha_error = ha_norm(locs, diff, radius);
    rep.bem_ha_norm = ha_norm(locs, pb, radius);
    rep.sb_ha_norm = sol.ha_norm();
    rep.ha_p_ratio = p0 > 0.0 ? rep.bem_ha_norm / p0 : 0.0;

    // surface mismatch ||(p_sb - p) - (q_sb - q)||_{L2(Gamma)} and the energy gap
    const ExteriorPressure qsb(ctx, std::make_shared<Solution1D>(sol));
    double mismatch2 = 0.0, gap2 = 0.0;
    for (std::size_t j = 0; j < bem.mesh.panels.size(); ++j) {
        const Panel& p = bem.mesh.panels[j];
        const double s = bem.mesh.ring_s[static_cast<std::size_t>(p.ring)];
        const double p_b = bem.p_station[static_cast<std::size_t>(p.ring)];
        const double q_b = bem.q_surface(static_cast<int>(j));
        const double p_s = sol.pressure(s);
        const double q_s = qsb(p.x);
        const double d = (p_s - p_b) - (q_s - q_b);
        mismatch2 += d * d * p.area;
        gap2 += (p_b - q_b) * (p_b - q_b) * p.area;
    }
    rep.surface_mismatch = std::sqrt(mismatch2);
    rep.pq_gap_ratio = p0 > 0.0 ? std::sqrt(gap2 / bem.mesh.total_area) / p0 : 0.0;

    // far-field D^{1,2} proxy: finite-difference |grad q| on the fixed probes
    const double h = 1e-3;
    auto grad_mag = [&](auto&& field, const Vec3& x) {
        const double gx = (field(x + Vec3{h, 0, 0}) - field(x - Vec3{h, 0, 0})) / (2 * h);
        const double gy = (field(x + Vec3{0, h, 0}) - field(x - Vec3{0, h, 0})) / (2 * h);
        const double gz = (field(x + Vec3{0, 0, h}) - field(x - Vec3{0, 0, h})) / (2 * h);
        return std::sqrt(gx * gx + gy * gy + gz * gz);
    };
    double rms = 0.0;
    const std::vector<Vec3> probes = exterior_probe_points();
    for (const Vec3& x : probes) {
        const double gb = grad_mag([&](const Vec3& y) { return bem.q(y); }, x);
        const double gs = grad_mag([&](const Vec3& y) { return qsb(y); }, x);
        rms += (gb - gs) * (gb - gs);
    }
    rep.gradient_proxy_rms = std::sqrt(rms / static_cast<double>(probes.size()));

    // global conservation: total wall flux vs the inlet Poiseuille flux
    double total_flux = 0.0;
    for (std::size_t j = 0; j < bem.mesh.panels.size(); ++j)
        total_flux += bem.dqdn(static_cast<int>(j)) * bem.mesh.panels[j].area;
    const double c_pois = M_PI / (8.0 * bem.phys.zeta * bem.phys.mu);
    const double target = c_pois * bem.inlet_flux();
    rep.conservation_rel = std::abs(total_flux - target) /
                           std::max(std::abs(target), 1e-300);
    return rep;
}

} // namespace perfusion
