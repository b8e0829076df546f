#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "perfusion/fields.hpp"

using namespace perfusion;

namespace {

std::shared_ptr<Solution1D> solve(std::shared_ptr<const Centerline> curve,
                                  std::shared_ptr<const RadiusProfile> radius, double eps,
                                  PhysicsParams phys, int cells = 64) {
    auto geom = std::make_shared<VesselGeometry>(curve, radius, eps);
    KernelContext ctx;
    const Mesh1D mesh = Mesh1D::graded(cells, eps * eps);
    return std::make_shared<Solution1D>(solve_pressure(assemble_system(geom, ctx, mesh, phys)));
}

std::shared_ptr<Solution1D> straight_solution(double eps, PhysicsParams phys = {1, 1, 1, 1},
                                              int cells = 64) {
    return solve(std::make_shared<StraightCenterline>(), std::make_shared<SpheroidalRadius>(), eps,
                 phys, cells);
}

std::shared_ptr<Solution1D> arc_solution(double eps, PhysicsParams phys = {1, 1, 1, 1},
                                         int cells = 64) {
    return solve(std::make_shared<ArcCenterline>(0.8), std::make_shared<SpheroidalRadius>(), eps,
                 phys, cells);
}

} // namespace

TEST_SUITE_BEGIN("fields");

TEST_CASE("cutoff function: plateau, zero zone, slope bound") {
    const double eps = 0.05;
    const CutoffFunction phi = CutoffFunction::for_epsilon(eps);
    const double band = std::pow(eps, 4.0 / 3.0);
    CHECK(phi.s_inner == doctest::Approx(1.0 - 2.0 * band));
    CHECK(phi.s_outer == doctest::Approx(1.0 - band));
    CHECK(phi.value(phi.s_inner) == 1.0);
    CHECK(phi.value(0.2) == 1.0);
    CHECK(phi.value(phi.s_outer) == 0.0);
    CHECK(phi.value(1.0) == 0.0);
    double max_slope = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double s = phi.s_inner + (phi.s_outer - phi.s_inner) * i / 1000.0;
        max_slope = std::max(max_slope, std::abs(phi.deriv(s)));
    }
    CHECK(max_slope <= 1.875 / band * 1.0001);
    CHECK(max_slope >= 1.0 / band);  // the transition really is eps^{-4/3}-steep
}

TEST_CASE("velocity ansatz surface and cutoff exactness") {
    auto sol = straight_solution(0.05);
    const VelocityAnsatz U(sol);
    const VesselGeometry& geom = *sol->geom;

    // tangential component vanishes identically on the surface
    for (double s : {0.1, 0.5, 0.9}) CHECK(U.components(geom.surface_radius(s), s).axial == 0.0);

    // cutoff containment: identically zero past 1 - eps^{4/3}
    const double s_zero = 0.5 * (U.cutoff().s_outer + 1.0);
    const double ra = geom.surface_radius(s_zero);
    CHECK(U.components(0.5 * ra, s_zero).radial == 0.0);
    CHECK(U.components(0.5 * ra, s_zero).axial == 0.0);
    CHECK(norm(U.cartesian(0.5 * ra, 1.0, s_zero)) == 0.0);

    CHECK_THROWS_AS(U.components(1.1 * geom.surface_radius(0.5), 0.5), DomainError);
    CHECK_THROWS_AS(U.components(0.0, 1.5), DomainError);
}

TEST_CASE("centerline axial velocity matches the Poiseuille profile peak") {
    auto sol = straight_solution(0.05);
    const VelocityAnsatz U(sol);
    for (double s : {0.2, 0.6}) {
        const double a = sol->geom->radius().value(s);
        const double ra = sol->geom->epsilon() * a;
        const double expect = -ra * ra * sol->p_prime(s) / 4.0;
        CHECK(U.components(0.0, s).axial == doctest::Approx(expect).epsilon(1e-13));
        // parabolic profile: centerline speed is twice the cross-section mean
        const double mid = U.components(ra / std::sqrt(2.0), s).axial;
        CHECK(mid == doctest::Approx(0.5 * U.components(0.0, s).axial).epsilon(1e-10));
    }
}

TEST_CASE("straight wall-flux identity (U.n) J = eps^4/(16 mu) F") {
    const double eps = 0.05;
    for (double mu : {1.0, 2.5}) {
        auto sol = straight_solution(eps, {mu, 1.0, 1.0, 1.0});
        const VelocityAnsatz U(sol);
        const double scale = eps * eps * eps * eps / (16.0 * mu);
        for (int i = 0; i < sol->mesh.nodes(); ++i) {
            const double s = sol->mesh.s[static_cast<std::size_t>(i)];
            if (s > U.cutoff().s_inner) break;
            const double lhs = U.wall_flux_density(s, 0.3);
            const double rhs = scale * sol->F[static_cast<std::size_t>(i)];
            CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
            // axisymmetry in theta
            CHECK(std::abs(U.wall_flux_density(s, 2.9) - lhs) < 1e-12);
        }
        CHECK_THROWS_AS(U.wall_flux_density(0.5 * (U.cutoff().s_inner + 1.0), 0.0),
                        CutoffZoneError);
    }

    // kappa = 0: no transmural flow at all
    auto sol0 = straight_solution(eps, {1.0, 0.0, 1.0, 1.0});
    const VelocityAnsatz U0(sol0);
    for (double s : {0.1, 0.4, 0.8}) CHECK(std::abs(U0.wall_flux_density(s, 1.0)) < 1e-14);
}

TEST_CASE("tangential defect on the surface for a constant-slope radius") {
    const double eps = 0.05;
    auto sol = solve(std::make_shared<StraightCenterline>(),
                     std::make_shared<LinearRadius>(1.0, -0.3), eps, {1, 1, 1, 1});
    const VelocityAnsatz U(sol);
    const VesselGeometry& geom = *sol->geom;
    for (double s : {0.3, 0.7}) {
        const double theta = 0.9;
        const Vec3 u = U.cartesian(geom.surface_radius(s), theta, s);
        const Vec3 n = geom.surface_normal(s, theta);
        const Vec3 defect = u - dot(u, n) * n;
        const RadiusSample rs = geom.radius().eval(s);
        const double gamma = std::sqrt(1.0 + eps * eps * rs.da * rs.da);
        const BishopFrame::Triad f = geom.frame().at(s);
        const Vec3 e_r = std::cos(theta) * f.e1 + std::sin(theta) * f.e2;
        const Vec3 n_perp = (1.0 / gamma) * (f.e_t + eps * rs.da * e_r);
        const double u_r = U.components(geom.surface_radius(s), s).radial;
        const Vec3 expect = (eps * rs.da / gamma * u_r) * n_perp;
        CHECK(norm(defect - expect) < 1e-14);
        // magnitude is O(eps |a'| |U.e_r|)
        CHECK(norm(defect) <= eps * std::abs(rs.da) * std::abs(u_r) + 1e-16);
    }
}

TEST_CASE("ansatz divergence: exact zero when straight, FD oracle when curved") {
    auto sol = straight_solution(0.06);
    const VelocityAnsatz U(sol);
    for (double s : {0.2, 0.5, 0.9})
        for (double rq : {0.0, 0.4, 0.9})
            CHECK(U.divergence(rq * sol->geom->surface_radius(s), 1.3, s) == 0.0);

    auto sola = arc_solution(0.06);
    const VelocityAnsatz Ua(sola);
    const VesselGeometry& geom = *sola->geom;
    auto fd_div = [&](double r, double theta, double s, double h) {
        const double kh = geom.kappa_hat(s, theta);
        auto Ur = [&](double rr) { return rr * (1.0 - rr * kh) * Ua.components(rr, s).radial; };
        auto Us = [&](double ss) { return Ua.components(r, ss).axial; };
        const double ddr = (Ur(r + h) - Ur(r - h)) / (2.0 * h);
        const double dds = (Us(s + h) - Us(s - h)) / (2.0 * h);
        return (ddr / r + dds) / (1.0 - r * kh);
    };
    for (double s : {0.3, 0.6}) {
        for (double theta : {0.0, 2.1}) {
            const double r = 0.5 * geom.surface_radius(s);
            const double exact = Ua.divergence(r, theta, s);
            const double e1 = std::abs(fd_div(r, theta, s, 2e-3) - exact);
            const double e2 = std::abs(fd_div(r, theta, s, 1e-3) - exact);
            CHECK(e2 < std::max(e1 / 2.5, 1e-12));  // second-order stencil
            CHECK(std::abs(exact) > 0.0);
        }
    }
}

TEST_CASE("divergence magnitude scales like eps^3 kappa* across an eps sweep") {
    std::vector<double> scaled;
    for (double eps : {0.1, 0.05, 0.025}) {
        auto sol = arc_solution(eps, {1, 1, 1, 1}, 96);
        const VelocityAnsatz U(sol);
        const VesselGeometry& geom = *sol->geom;
        double sup = 0.0;
        for (int i = 0; i < sol->mesh.nodes(); ++i) {
            const double s = sol->mesh.s[static_cast<std::size_t>(i)];
            if (s >= 1.0 - std::pow(eps, 4.0 / 3.0)) break;
            for (double rq : {0.3, 0.6, 0.95})
                for (double th : {0.0, 1.5, 3.1, 4.7})
                    sup = std::max(sup, std::abs(U.divergence(rq * geom.surface_radius(s), th, s)));
        }
        scaled.push_back(sup / (eps * eps * eps * geom.frame().kappa_max()));
    }
    for (double v : scaled) {
        CHECK(v <= 3.0 * scaled.front());
        CHECK(v >= scaled.front() / 3.0);
    }
}

TEST_CASE("exterior pressure: zero density, far-field monopole, interior rejection") {
    KernelContext ctx;
    auto sol0 = straight_solution(0.05, {1, 0, 1, 1});
    const ExteriorPressure q0(ctx, sol0);
    CHECK(q0({0.3, 0.0, 0.5}) == 0.0);
    CHECK(q0.at_surface(0.5, 1.0) == 0.0);

    auto sol = arc_solution(0.05, {1.0, 1.0, 1.3, 1.0});
    const ExteriorPressure q(ctx, sol);
    // int_0^1 F dt including the constant tail past the last node
    double intF = 0.0;
    for (int i = 0; i < sol->mesh.cells(); ++i)
        intF += 0.5 * (sol->F[static_cast<std::size_t>(i)] + sol->F[static_cast<std::size_t>(i) + 1]) *
                sol->mesh.cell_width(i);
    intF += sol->F.back() * (1.0 - sol->mesh.s.back());
    const double expect_coeff = M_PI / (8.0 * sol->phys.zeta * sol->phys.mu) * intF / (2.0 * M_PI);
    for (const Vec3& dir : {Vec3{1, 0, 0.02}, Vec3{0.3, 0.8, 0.52}}) {
        const Vec3 x = (50.0 / norm(dir)) * dir;
        CHECK(q(x) * 50.0 == doctest::Approx(expect_coeff).epsilon(0.01));
    }

    CHECK_THROWS_AS(q(sol->geom->centerline().point(0.5)), DomainError);

    // linearity in p0
    auto sol2 = arc_solution(0.05, {1.0, 1.0, 1.3, 2.0});
    const ExteriorPressure q2(ctx, sol2);
    const Vec3 probe{0.4, 0.1, 0.6};
    CHECK(q2(probe) == doctest::Approx(2.0 * q(probe)).epsilon(1e-12));
}

TEST_CASE("exterior pressure decays like 1/|x| into the far field") {
    KernelContext ctx;
    auto sol = straight_solution(0.05);
    const ExteriorPressure q(ctx, sol);
    const Vec3 dir = normalized(Vec3{0.5, 0.4, 0.75});
    double prev = 0.0;
    for (double R : {10.0, 20.0, 40.0}) {
        const double v = q(R * dir) * R;
        if (prev != 0.0) CHECK(std::abs(v - prev) / std::abs(prev) < 0.1);
        prev = v;
    }
}

TEST_CASE("harmonicity stencil for the exterior pressure at 20 random points") {
    KernelContext ctx;
    auto sol = arc_solution(0.05, {1, 1, 1, 1}, 48);
    const ExteriorPressure q(ctx, sol);
    const VesselGeometry& geom = *sol->geom;
    const double h = 1e-3;
    double fmax = 0.0;
    for (double f : sol->F) fmax = std::max(fmax, std::abs(f));
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int tested = 0;
    while (tested < 20) {
        const Vec3 p{1.4 * u(rng) - 0.4, 1.2 * u(rng) - 0.6, 0.05 + 1.4 * u(rng)};
        const auto c = geom.invert(p);
        if (c.r < geom.surface_radius(std::clamp(c.s, 0.0, 0.999)) + 10.0 * h) continue;
        if (p.z < 10.0 * h) continue;
        double lap = -6.0 * q(p);
        for (const Vec3& d : {Vec3{h, 0, 0}, Vec3{-h, 0, 0}, Vec3{0, h, 0}, Vec3{0, -h, 0},
                              Vec3{0, 0, h}, Vec3{0, 0, -h}})
            lap += q(p + d);
        CHECK(std::abs(lap / (h * h)) < 1e-4 * fmax);
        ++tested;
    }
}

TEST_CASE("theta variation: exact axisymmetry when straight, linear in p0") {
    KernelContext ctx;
    auto sol = straight_solution(0.05);
    const ExteriorPressure q(ctx, sol);
    CHECK(theta_variation_at(q, 0.5, 16) < 1e-12);
    CHECK(theta_variation_surface(q, 8) < 1e-12);

    auto a1 = arc_solution(0.08, {1, 1, 1, 1}, 48);
    auto a2 = arc_solution(0.08, {1, 1, 1, 2}, 48);
    const ExteriorPressure qa1(ctx, a1), qa2(ctx, a2);
    const double v1 = theta_variation_surface(qa1, 8);
    const double v2 = theta_variation_surface(qa2, 8);
    CHECK(v1 > 1e-6);  // curved geometry genuinely breaks axisymmetry
    CHECK(v2 == doctest::Approx(2.0 * v1).epsilon(1e-12));
}

TEST_CASE("field sample grids tag points by coordinate inversion") {
    auto geom = std::make_shared<VesselGeometry>(std::make_shared<StraightCenterline>(),
                                                 std::make_shared<SpheroidalRadius>(), 0.1);
    const auto box = FieldSampleGrid::box(*geom, {-0.3, -0.3, -0.1}, {0.3, 0.3, 0.9}, {7, 7, 9});
    int interior = 0, exterior = 0;
    for (const auto& p : box.points) {
        CHECK(p.x.z >= 0.0);
        if (p.tag == FieldSampleGrid::Tag::Interior) {
            ++interior;
            CHECK(p.r < geom->surface_radius(p.s));
        } else {
            ++exterior;
        }
    }
    CHECK(interior > 0);
    CHECK(exterior > 0);

    const auto lat = FieldSampleGrid::surface_lattice(*geom, 12, 8, 0.99);
    for (const auto& p : lat.points)
        CHECK(dist(p.x, geom->centerline().point(p.s)) ==
              doctest::Approx(geom->surface_radius(p.s)).epsilon(1e-12));
}

TEST_SUITE_END();
