#include <doctest.h>

#include <memory>
#include <numeric>
#include <vector>

#include "perfusion/bem.hpp"
#include "perfusion/parallel.hpp"
#include "perfusion/solver1d.hpp"

using namespace perfusion;

namespace {

struct ThreadGuard {
    ~ThreadGuard() { par::set_threads(0); }
};

} // namespace

TEST_SUITE_BEGIN("parallel");

TEST_CASE("parallel_for covers every index exactly once") {
    ThreadGuard guard;
    std::vector<int> hits(1000, 0);
    par::set_threads(0);
    par::parallel_for(1000, [&](std::int64_t i) { hits[static_cast<std::size_t>(i)] += 1; });
    CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 1000);
    for (int h : hits) CHECK(h == 1);
}

TEST_CASE("integral-block assembly is bit-identical serial vs parallel") {
    ThreadGuard guard;
    const double eps = 0.05;
    auto geom = std::make_shared<VesselGeometry>(std::make_shared<ArcCenterline>(0.8),
                                                 std::make_shared<SpheroidalRadius>(), eps);
    KernelContext ctx;
    const Mesh1D mesh = Mesh1D::graded(48, eps * eps);

    par::set_threads(1);
    const System1D serial = assemble_system(geom, ctx, mesh, {1, 1, 1, 1});
    par::set_threads(0);
    const System1D parallel = assemble_system(geom, ctx, mesh, {1, 1, 1, 1});
    CHECK((serial.A - parallel.A).cwiseAbs().maxCoeff() == 0.0);

    const Solution1D s1 = solve_pressure(serial);
    const Solution1D s2 = solve_pressure(parallel);
    for (std::size_t i = 0; i < s1.p.size(); ++i) CHECK(s1.p[i] == s2.p[i]);
}

TEST_CASE("bem assembly is bit-identical serial vs parallel") {
    ThreadGuard guard;
    const double eps = 0.05;
    auto geom = std::make_shared<VesselGeometry>(std::make_shared<StraightCenterline>(),
                                                 std::make_shared<SpheroidalRadius>(), eps);
    const BoundaryMesh bm = build_boundary_mesh(geom, Mesh1D::graded(12, eps * eps), 8);

    par::set_threads(1);
    const BemSystem serial = assemble_bem(bm, {1, 1, 1, 1});
    par::set_threads(0);
    const BemSystem parallel = assemble_bem(bm, {1, 1, 1, 1});
    CHECK((serial.A - parallel.A).cwiseAbs().maxCoeff() == 0.0);

    const std::vector<double> one(bm.panels.size(), 1.0);
    par::set_threads(1);
    const auto nd1 = apply_normal_derivative(bm, KernelVariant::HalfSpaceNeumann, one);
    par::set_threads(0);
    const auto nd2 = apply_normal_derivative(bm, KernelVariant::HalfSpaceNeumann, one);
    for (std::size_t i = 0; i < nd1.size(); ++i) CHECK(nd1[i] == nd2[i]);
}

TEST_SUITE_END();
