// Acceptance suite: runs every release criterion at its pinned tolerance and
// prints one pass/fail line per criterion. Exit code 0 iff all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "perfusion/bem.hpp"
#include "perfusion/fields.hpp"
#include "perfusion/harness.hpp"
#include "perfusion/norms.hpp"

using namespace perfusion;

namespace {

std::string sci(double v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%.2e", v);
    return buf;
}

struct Outcome {
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string note;
};

int g_failures = 0;

void run_criterion(int id, const std::string& label, double budget_s,
                   const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out.passed = false;
        out.note = std::string("exception: ") + e.what();
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = dt < budget_s;
    const bool ok = out.passed && in_budget;
    if (!ok) ++g_failures;
    std::printf("[%s] criterion %2d: %s  (measured=%.3e threshold=%.3e%s%s, %.1fs/%.0fs)\n",
                ok ? "PASS" : "FAIL", id, label.c_str(), out.measured, out.threshold,
                out.note.empty() ? "" : ", ", out.note.c_str(), dt, budget_s);
    std::fflush(stdout);
}

std::shared_ptr<VesselGeometry> make_geom(const std::string& kind, double eps) {
    std::shared_ptr<const Centerline> curve;
    if (kind == "straight")
        curve = std::make_shared<StraightCenterline>();
    else
        curve = std::make_shared<ArcCenterline>(0.8);
    return std::make_shared<VesselGeometry>(curve, std::make_shared<SpheroidalRadius>(), eps);
}

std::shared_ptr<Solution1D> solve_sb(std::shared_ptr<const VesselGeometry> geom,
                                     const KernelContext& ctx, int cells, PhysicsParams phys) {
    const Mesh1D mesh = Mesh1D::graded(cells, geom->epsilon() * geom->epsilon());
    return std::make_shared<Solution1D>(solve_pressure(assemble_system(geom, ctx, mesh, phys)));
}

double sn_one_exact(double rho, double z, double beta, bool halfspace) {
    double v = std::log((beta - z + std::hypot(beta - z, rho)) / (-z + std::hypot(z, rho)));
    if (halfspace)
        v += std::log((beta + z + std::hypot(beta + z, rho)) / (z + std::hypot(z, rho)));
    return v / (4.0 * M_PI * beta);
}

// shared state between criteria 8 and 9 (one sweep feeds both)
std::vector<AprioriRatios> g_sweep_ratios;

} // namespace

int main() {
    std::printf("acceptance suite: thin-vessel perfusion models\n");
    const PhysicsParams phys{1.0, 1.0, 1.0, 1.0};

    run_criterion(1, "slender-body line potential matches the closed form", 1.0, [&] {
        const double eps = 0.05;
        auto geom = make_geom("straight", eps);
        const double beta = std::sqrt(1.0 - eps * eps);
        const Mesh1D mesh = Mesh1D::graded(64, eps * eps);
        const std::vector<double> one(mesh.s.size(), 1.0);
        KernelContext half, free;
        free.variant = KernelVariant::FreeSpaceTest;
        SnOperator op_half(half, *geom, mesh.s), op_free(free, *geom, mesh.s);

        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
            const double rho = 0.15 + 0.6 * u(rng);
            const double z = 0.02 + 1.5 * u(rng);
            const Vec3 x{rho, 0.0, z};
            const double ef = sn_one_exact(rho, z, beta, false);
            const double eh = sn_one_exact(rho, z, beta, true);
            worst = std::max(worst, std::abs(op_free.apply(one, x) - ef) / std::abs(ef));
            worst = std::max(worst, std::abs(op_half.apply(one, x) - eh) / std::abs(eh));
        }
        Outcome out;
        out.note = "off-surface";
        double worst_on = 0.0;
        for (double s : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const double rho = eps * geom->radius().value(s);
            const double exact = sn_one_exact(rho, s, beta, true);
            worst_on = std::max(worst_on, std::abs(op_half.apply(one, geom->surface_point(s, 1.0)) -
                                                   exact) /
                                              std::abs(exact));
        }
        out.passed = worst <= 1e-10 && worst_on <= 1e-6;
        out.measured = worst;
        out.threshold = 1e-10;
        out.note = "on-surface=" + sci(worst_on) + " (tol 1e-6)";
        return out;
    });

    run_criterion(2, "kappa = 0 degenerates to p = p0, F = 0 (1D and 3D-1D)", 10.0, [&] {
        const double eps = 0.05;
        PhysicsParams zero = phys;
        zero.kappa = 0.0;
        auto geom = make_geom("straight", eps);
        KernelContext ctx;
        auto sb = solve_sb(geom, ctx, 48, zero);
        double dev = 0.0;
        for (std::size_t i = 0; i < sb->p.size(); ++i) {
            dev = std::max(dev, std::abs(sb->p[i] - zero.p0));
            dev = std::max(dev, std::abs(sb->F[i]));
        }
        const Mesh1D mesh = Mesh1D::graded(24, eps * eps);
        const BemSolution bem = solve_bem(assemble_bem(build_boundary_mesh(geom, mesh, 8), zero));
        for (double v : bem.sigma) dev = std::max(dev, std::abs(v));
        for (double v : bem.p_station) dev = std::max(dev, std::abs(v - zero.p0));
        return Outcome{dev <= 1e-12, dev, 1e-12, ""};
    });

    run_criterion(3, "solutions and fields scale exactly with p0", 60.0, [&] {
        const double eps = 0.05;
        auto geom = make_geom("arc", eps);
        KernelContext ctx;
        PhysicsParams twice = phys;
        twice.p0 = 2.0;
        auto s1 = solve_sb(geom, ctx, 48, phys);
        auto s2 = solve_sb(geom, ctx, 48, twice);
        double dev = 0.0;
        for (std::size_t i = 0; i < s1->p.size(); ++i) {
            dev = std::max(dev, std::abs(s2->p[i] - 2.0 * s1->p[i]));
            dev = std::max(dev, std::abs(s2->F[i] - 2.0 * s1->F[i]));
        }
        const ExteriorPressure q1(ctx, s1), q2(ctx, s2);
        const VelocityAnsatz u1(s1), u2(s2);
        for (const Vec3& x : {Vec3{0.3, 0.2, 0.5}, Vec3{-0.2, 0.4, 1.0}})
            dev = std::max(dev, std::abs(q2(x) - 2.0 * q1(x)));
        for (double s : {0.2, 0.6}) {
            const double r = 0.5 * geom->surface_radius(s);
            dev = std::max(dev, std::abs(u2.components(r, s).axial - 2.0 * u1.components(r, s).axial));
            dev = std::max(dev, std::abs(u2.components(r, s).radial - 2.0 * u1.components(r, s).radial));
        }
        dev = std::max(dev, std::abs(theta_variation_at(q2, 0.5, 16) -
                                     2.0 * theta_variation_at(q1, 0.5, 16)));
        const Mesh1D mesh = Mesh1D::graded(16, eps * eps);
        const BemSolution b1 = solve_bem(assemble_bem(build_boundary_mesh(geom, mesh, 8), phys));
        const BemSolution b2 = solve_bem(assemble_bem(build_boundary_mesh(geom, mesh, 8), twice));
        for (std::size_t i = 0; i < b1.sigma.size(); ++i)
            dev = std::max(dev, std::abs(b2.sigma[i] - 2.0 * b1.sigma[i]));
        return Outcome{dev <= 1e-12, dev, 1e-12, ""};
    });

    run_criterion(4, "weighted Poincare holds for 100 seeded test functions", 1.0, [&] {
        const Mesh1D mesh = Mesh1D::graded(256, 0.05 * 0.05);
        SpheroidalRadius rad;
        std::mt19937_64 rng(4242);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> f(mesh.s.size(), 0.0);
            double coef[6];
            for (double& c : coef) c = u(rng);
            for (std::size_t i = 0; i < f.size(); ++i)
                for (int k = 0; k < 6; ++k) f[i] += coef[k] * std::sin((k + 0.5) * M_PI * mesh.s[i]);
            worst = std::max(worst, discrete_l2(mesh.s, f) / weighted_grad_l2(mesh.s, f, rad));
        }
        return Outcome{worst <= 2.05, worst, 2.05, ""};
    });

    run_criterion(5, "theta-variation of q^SB scales like eps |log eps|", 300.0, [&] {
        KernelContext ctx;
        const std::vector<double> epss{0.1, 0.05, 0.025, 0.0125};
        std::vector<double> devs;
        for (double eps : epss) {
            auto geom = make_geom("arc", eps);
            auto sb = solve_sb(geom, ctx, 96, phys);
            const ExteriorPressure q(ctx, sb);
            devs.push_back(theta_variation_surface(q, 16) / std::abs(phys.p0));
        }
        const double raw = loglog_slope(epss, devs, false);
        const double corr = loglog_slope(epss, devs, true);
        const bool ok = (raw >= 0.8 && raw <= 1.3) || (corr >= 0.8 && corr <= 1.3);
        return Outcome{ok, raw, 0.8, "corrected=" + sci(corr)};
    });

    run_criterion(6, "straight identities: div U = 0 and (U.n)J = eps^4 F/(16 mu)", 30.0, [&] {
        const double eps = 0.05;
        auto geom = make_geom("straight", eps);
        KernelContext ctx;
        auto sb = solve_sb(geom, ctx, 96, phys);
        const VelocityAnsatz U(sb);
        double div_worst = 0.0, flux_worst = 0.0;
        const double scale = std::pow(eps, 4) / (16.0 * phys.mu);
        for (int i = 0; i < sb->mesh.nodes(); ++i) {
            const double s = sb->mesh.s[static_cast<std::size_t>(i)];
            if (s > U.cutoff().s_inner) break;
            const double ra = geom->surface_radius(s);
            for (double frac : {0.25, 0.6, 0.95})
                for (double th : {0.0, 2.2, 4.4})
                    div_worst = std::max(div_worst, std::abs(U.divergence(frac * ra, th, s)));
            flux_worst = std::max(flux_worst,
                                  std::abs(U.wall_flux_density(s, 1.2) -
                                           scale * sb->F[static_cast<std::size_t>(i)]));
        }
        const bool ok = div_worst <= 1e-10 && flux_worst <= 1e-10;
        return Outcome{ok, std::max(div_worst, flux_worst), 1e-10, "div=" + sci(div_worst)};
    });

    run_criterion(7, "sphere jump relation: N[1] = -1 within 2% at 16x16", 30.0, [&] {
        const BoundaryMesh sphere = build_sphere_mesh(16, 16);
        const std::vector<double> one(sphere.panels.size(), 1.0);
        const auto nd = apply_normal_derivative(sphere, KernelVariant::FreeSpaceTest, one);
        double worst = 0.0;
        for (double v : nd) worst = std::max(worst, std::abs(v + 1.0));
        return Outcome{worst <= 0.02, worst, 0.02, ""};
    });

    run_criterion(8, "3D-1D vs 1D: H^a error decreases with order >= 0.4", 1200.0, [&] {
        KernelContext ctx;
        const std::vector<double> epss{0.1, 0.05, 0.025};
        const std::vector<int> cells{64, 96, 144};
        std::vector<double> errs;
        g_sweep_ratios.clear();
        for (std::size_t k = 0; k < epss.size(); ++k) {
            auto geom = make_geom("straight", epss[k]);
            const Mesh1D mesh = Mesh1D::graded(cells[k], epss[k] * epss[k]);
            auto sb = std::make_shared<Solution1D>(
                solve_pressure(assemble_system(geom, ctx, mesh, phys)));
            g_sweep_ratios.push_back(check_apriori_bounds(*sb));
            const BemSolution bem =
                solve_bem(assemble_bem(build_boundary_mesh(geom, mesh, 16), phys));
            errs.push_back(compare_to_1d(bem, *sb, ctx).ha_error);
        }
        bool monotone = true;
        for (std::size_t i = 1; i < errs.size(); ++i)
            if (!(errs[i] < errs[i - 1])) monotone = false;
        const double raw = loglog_slope(epss, errs, false);
        const double corr = loglog_slope(epss, errs, true);
        const double best = std::max(raw, corr);
        return Outcome{monotone && best >= 0.4, raw, 0.4,
                       "corrected=" + sci(corr) + (monotone ? "" : " NOT monotone")};
    });

    run_criterion(9, "a-priori norm ratios stay bounded across the sweep", 60.0, [&] {
        if (g_sweep_ratios.size() < 2)
            return Outcome{false, 0.0, 2.0, "criterion 8 sweep unavailable"};
        double worst_growth = 0.0;
        for (std::size_t i = 1; i < g_sweep_ratios.size(); ++i)
            for (auto f : {&AprioriRatios::l2_p, &AprioriRatios::l2_a2dp, &AprioriRatios::linf_p,
                           &AprioriRatios::linf_adp, &AprioriRatios::linf_a3d2p}) {
                const double prev = g_sweep_ratios[i - 1].*f;
                const double cur = g_sweep_ratios[i].*f;
                if (prev > 1e-14) worst_growth = std::max(worst_growth, cur / prev);
            }
        return Outcome{worst_growth <= 2.0, worst_growth, 2.0, "max growth per halving"};
    });

    run_criterion(10, "self-convergence: 1D order >= 1.9, BEM probe order >= 1.0", 600.0, [&] {
        const double eps = 0.05;
        auto geom = make_geom("straight", eps);
        KernelContext ctx;
        auto solve_cells = [&](int cells) { return solve_sb(geom, ctx, cells, phys); };
        auto ref = solve_cells(512);
        double prev = 0.0, min_order = 1e300;
        for (int cells : {64, 128, 256}) {
            auto sol = solve_cells(cells);
            const int stride = 512 / cells;
            std::vector<double> diff(sol->p.size());
            for (std::size_t i = 0; i < diff.size(); ++i)
                diff[i] = sol->p[i] - ref->p[i * static_cast<std::size_t>(stride)];
            const double err = ha_norm(sol->mesh.s, diff, geom->radius());
            if (prev > 0.0) min_order = std::min(min_order, std::log2(prev / err));
            prev = err;
        }

        const std::vector<Vec3> probes = exterior_probe_points();
        std::vector<std::vector<double>> qv;
        for (auto [cells, nth] : {std::pair{8, 8}, {16, 16}, {32, 32}, {64, 64}}) {
            const BemSolution bem = solve_bem(
                assemble_bem(build_boundary_mesh(geom, Mesh1D::graded(cells, eps * eps), nth), phys));
            std::vector<double> q;
            for (const Vec3& x : probes) q.push_back(bem.q(x));
            qv.push_back(std::move(q));
        }
        std::vector<double> h{1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0}, deltas;
        for (int k = 0; k < 3; ++k) {
            double rms = 0.0;
            for (std::size_t i = 0; i < probes.size(); ++i)
                rms += (qv[static_cast<std::size_t>(k)][i] - qv[3][i]) *
                       (qv[static_cast<std::size_t>(k)][i] - qv[3][i]);
            deltas.push_back(std::sqrt(rms / static_cast<double>(probes.size())));
        }
        const double bem_order = loglog_slope(h, deltas, false);
        const bool ok = min_order >= 1.9 && bem_order >= 1.0 && deltas[0] / deltas[2] >= 3.0;
        return Outcome{ok, min_order, 1.9,
                       "bem_order=" + sci(bem_order) + " ratio=" + sci(deltas[0] / deltas[2])};
    });

    std::printf("%s: %d criterion(s) failed\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
                g_failures);
    return g_failures == 0 ? 0 : 1;
}
