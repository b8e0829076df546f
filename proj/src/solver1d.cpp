#include "perfusion/solver1d.hpp"

#include <algorithm>
#include <cmath>

#include "perfusion/errors.hpp"
#include "perfusion/norms.hpp"
#include "perfusion/parallel.hpp"

namespace perfusion {

System1D assemble_system(std::shared_ptr<const VesselGeometry> geom, const KernelContext& ctx,
                         const Mesh1D& mesh, const PhysicsParams& phys) {
    if (!(phys.mu > 0.0 && phys.zeta > 0.0 && phys.kappa >= 0.0))
        throw ConfigError("physics constants must be positive (kappa may be zero)");
    const int n = mesh.nodes();
    const int N = mesh.cells();

    System1D sys;
    sys.mesh = mesh;
    sys.phys = phys;
    sys.geom = geom;
    sys.ctx = ctx;
    sys.A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    sys.rhs = Eigen::VectorXd::Zero(2 * n);

    const RadiusProfile& radius = geom->radius();
    auto a4_face = [&](int i) {
        const double a = radius.value(mesh.face(i));
        return a * a * a * a;
    };

    // Dirichlet row
    sys.A(0, 0) = 1.0;
    sys.rhs(0) = phys.p0;

    // conservative flux rows: [g_{i+1/2} - g_{i-1/2}] = h_i F_i, and the
    // zero-tip-flux closure replaces the outer face at the last node
    for (int i = 1; i <= N; ++i) {
        const double cm = a4_face(i - 1) / mesh.cell_width(i - 1);
        sys.A(i, i - 1) += cm;
        sys.A(i, i) -= cm;
        if (i < N) {
            const double cp = a4_face(i) / mesh.cell_width(i);
            sys.A(i, i + 1) += cp;
            sys.A(i, i) -= cp;
        }
        sys.A(i, n + i) = -mesh.dual(i);
    }

    // integral rows: F_i - 16 mu kappa a_i p_i + (kappa/zeta) a_i * avg_i(F) = 0,
    // where avg_i is the theta-averaged S_N with F as the line density.
    // (Substituting q^SB = (pi / 8 zeta mu) S_N[F] into the averaged Robin
    // balance combines the 8 mu kappa / pi and pi / (8 zeta mu) factors.)
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    if (phys.kappa != 0.0) {
        SnOperator op(ctx, *geom, mesh.s);
        std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
        par::parallel_for(n, [&](std::int64_t i) {
            std::vector<double> w(static_cast<std::size_t>(n), 0.0);
            op.surface_average_weights(mesh.s[static_cast<std::size_t>(i)], w);
            rows[static_cast<std::size_t>(i)] = std::move(w);
        });
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) W(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    for (int i = 0; i < n; ++i) {
        const double a = radius.value(mesh.s[static_cast<std::size_t>(i)]);
        sys.A(n + i, n + i) += 1.0;
        sys.A(n + i, i) -= 16.0 * phys.mu * phys.kappa * a;
        if (phys.kappa != 0.0) {
            const double c = phys.kappa / phys.zeta * a;
            for (int j = 0; j < n; ++j) sys.A(n + i, n + j) += c * W(i, j);
        }
    }
    return sys;
}

Solution1D solve_pressure(const System1D& system) {
    const int n = system.nodes();
    const int m = 2 * n;

    // row equilibration keeps the degenerate tip coefficients from wrecking
    // the pivoting scale
    Eigen::MatrixXd A = system.A;
    Eigen::VectorXd b = system.rhs;
    for (int r = 0; r < m; ++r) {
        const double scale = A.row(r).cwiseAbs().maxCoeff();
        if (scale == 0.0)
            throw ConditioningError("singular assembled matrix (zero row); n_cells=" +
                                    std::to_string(system.mesh.cells()) +
                                    ", eps=" + std::to_string(system.geom->epsilon()));
        A.row(r) /= scale;
        b(r) /= scale;
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::VectorXd x = lu.solve(b);
    if (!x.allFinite())
        throw ConditioningError("singular assembled matrix; n_cells=" +
                                std::to_string(system.mesh.cells()) +
                                ", eps=" + std::to_string(system.geom->epsilon()));

    const Eigen::VectorXd r = A * x - b;
    const Eigen::VectorXd denom = A.cwiseAbs() * x.cwiseAbs() + b.cwiseAbs();
    double backward = 0.0;
    for (int i = 0; i < m; ++i)
        if (denom(i) > 0.0) backward = std::max(backward, std::abs(r(i)) / denom(i));
    const double tol = 1e-10;
    if (backward > tol)
        throw ConvergenceError("solver residual " + std::to_string(backward) +
                               " exceeds contract " + std::to_string(tol));

    Solution1D sol;
    sol.mesh = system.mesh;
    sol.phys = system.phys;
    sol.geom = system.geom;
    sol.residual = backward;
    sol.p.resize(static_cast<std::size_t>(n));
    sol.F.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        sol.p[static_cast<std::size_t>(i)] = x(i);
        sol.F[static_cast<std::size_t>(i)] = x(n + i);
    }

    // scheme-consistent boundary flux from the half-cell balance at node 0
    const double a0f = system.geom->radius().value(system.mesh.face(0));
    const double g_half = a0f * a0f * a0f * a0f *
                          (sol.p[1] - sol.p[0]) / system.mesh.cell_width(0);
    sol.boundary_flux = g_half - system.mesh.dual(0) * sol.F[0];

    sol.cumF_.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i + 1 < n; ++i)
        sol.cumF_[static_cast<std::size_t>(i) + 1] =
            sol.cumF_[static_cast<std::size_t>(i)] +
            0.5 * (sol.F[static_cast<std::size_t>(i)] + sol.F[static_cast<std::size_t>(i) + 1]) *
                system.mesh.cell_width(i);
    return sol;
}

int Solution1D::locate(double s) const {
    const auto& grid = mesh.s;
    if (s <= grid.front()) return 0;
    if (s >= grid.back()) return static_cast<int>(grid.size()) - 2;
    const auto it = std::upper_bound(grid.begin(), grid.end(), s);
    return static_cast<int>(std::distance(grid.begin(), it)) - 1;
}

double Solution1D::flux(double s) const {
    const int i = locate(s);
    const double si = mesh.s[static_cast<std::size_t>(i)];
    const double d = mesh.cell_width(i);
    const double tau = std::clamp(s, mesh.s.front(), mesh.s.back()) - si;
    const double fi = F[static_cast<std::size_t>(i)];
    const double fj = F[static_cast<std::size_t>(i) + 1];
    const double cum = cumF_[static_cast<std::size_t>(i)] + fi * tau + 0.5 * (fj - fi) * tau * tau / d;
    return boundary_flux + cum;
}

double Solution1D::tip_face_flux() const {
    const int N = mesh.cells();
    const double a = geom->radius().value(mesh.face(N - 1));
    return a * a * a * a * (p[static_cast<std::size_t>(N)] - p[static_cast<std::size_t>(N) - 1]) /
           mesh.cell_width(N - 1);
}

double Solution1D::p_prime(double s) const {
    const double a = geom->radius().value(s);
    return flux(s) / (a * a * a * a);
}

double Solution1D::pressure(double s) const {
    const int i = locate(s);
    const double si = mesh.s[static_cast<std::size_t>(i)];
    const double h = mesh.cell_width(i);
    const double t = (std::clamp(s, mesh.s.front(), mesh.s.back()) - si) / h;
    const double pa = p[static_cast<std::size_t>(i)], pb = p[static_cast<std::size_t>(i) + 1];
    const double da = p_prime(si), db = p_prime(mesh.s[static_cast<std::size_t>(i) + 1]);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * pa + (t3 - 2 * t2 + t) * h * da + (-2 * t3 + 3 * t2) * pb +
           (t3 - t2) * h * db;
}

double Solution1D::F_at(double s) const {
    const int i = locate(s);
    const double lam = (std::clamp(s, mesh.s.front(), mesh.s.back()) -
                        mesh.s[static_cast<std::size_t>(i)]) /
                       mesh.cell_width(i);
    return (1.0 - lam) * F[static_cast<std::size_t>(i)] + lam * F[static_cast<std::size_t>(i) + 1];
}

LineDensity Solution1D::density() const { return LineDensity(mesh.s, F); }

double Solution1D::ha_norm() const { return perfusion::ha_norm(mesh.s, p, geom->radius()); }

AprioriRatios check_apriori_bounds(const Solution1D& sol) {
    const double p0 = std::abs(sol.phys.p0);
    const double eps = sol.geom->epsilon();
    const double se = std::sqrt(eps);
    AprioriRatios r;
    if (p0 == 0.0) return r;

    r.l2_p = discrete_l2(sol.mesh.s, sol.p) / p0;
    r.l2_a2dp = weighted_grad_l2(sol.mesh.s, sol.p, sol.geom->radius()) / p0;

    for (int i = 0; i < sol.mesh.nodes(); ++i) {
        const double s = sol.mesh.s[static_cast<std::size_t>(i)];
        const RadiusSample rs = sol.geom->radius().eval(s);
        const double g = sol.flux(s);
        const double a = rs.a;
        r.linf_p = std::max(r.linf_p, se * std::abs(sol.p[static_cast<std::size_t>(i)]) / p0);
        // a p' = g / a^3, a^3 p'' = F/a - 4 (a a') g / a^3; both via bounded products
        r.linf_adp = std::max(r.linf_adp, se * std::abs(g / (a * a * a)) / p0);
        const double a3p2 = sol.F[static_cast<std::size_t>(i)] / a - 4.0 * rs.a_da * g / (a * a * a);
        r.linf_a3d2p = std::max(r.linf_a3d2p, se * std::abs(a3p2) / p0);
    }
    return r;
}

} // namespace perfusion
