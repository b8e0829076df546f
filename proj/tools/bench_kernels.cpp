// Timings of the data-parallel kernels against the serial reference path,
// with a bitwise equality check (rows write disjoint slots, so thread count
// must not change any result).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "perfusion/bem.hpp"
#include "perfusion/fields.hpp"
#include "perfusion/parallel.hpp"
#include "perfusion/solver1d.hpp"

using namespace perfusion;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct BenchResult {
    double serial_ms;
    double parallel_ms;
    double max_diff;
};

template <class F>
BenchResult bench(F&& run) {
    par::set_threads(1);
    run();  // warm up caches and one-time tables
    double t0 = now_ms();
    const std::vector<double> serial = run();
    const double serial_ms = now_ms() - t0;
    par::set_threads(0);
    t0 = now_ms();
    const std::vector<double> parallel = run();
    const double parallel_ms = now_ms() - t0;
    double diff = 0.0;
    for (std::size_t i = 0; i < serial.size(); ++i)
        diff = std::max(diff, std::abs(serial[i] - parallel[i]));
    return {serial_ms, parallel_ms, diff};
}

} // namespace

int main() {
    const double eps = 0.05;
    const PhysicsParams phys{1, 1, 1, 1};
    auto geom = std::make_shared<VesselGeometry>(std::make_shared<ArcCenterline>(0.8),
                                                 std::make_shared<SpheroidalRadius>(), eps);
    KernelContext ctx;

    std::printf("%-28s %12s %12s %9s %10s\n", "kernel", "serial[ms]", "omp[ms]", "speedup",
                "max|diff|");

    {
        const Mesh1D mesh = Mesh1D::graded(192, eps * eps);
        auto run = [&] {
            const System1D sys = assemble_system(geom, ctx, mesh, phys);
            const int n = mesh.nodes();
            std::vector<double> flat;
            flat.reserve(static_cast<std::size_t>(n) * n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) flat.push_back(sys.A(n + i, n + j));
            return flat;
        };
        const BenchResult r = bench(run);
        std::printf("%-28s %12.1f %12.1f %8.2fx %10.2e\n", "1d integral-block assembly",
                    r.serial_ms, r.parallel_ms, r.serial_ms / r.parallel_ms, r.max_diff);
    }

    {
        const Mesh1D mesh = Mesh1D::graded(32, eps * eps);
        const BoundaryMesh bm = build_boundary_mesh(geom, mesh, 16);
        auto run = [&] {
            const BemSystem sys = assemble_bem(bm, phys);
            std::vector<double> flat;
            const int n = static_cast<int>(sys.A.rows());
            flat.reserve(static_cast<std::size_t>(n) * n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) flat.push_back(sys.A(i, j));
            return flat;
        };
        const BenchResult r = bench(run);
        std::printf("%-28s %12.1f %12.1f %8.2fx %10.2e\n", "bem matrix assembly", r.serial_ms,
                    r.parallel_ms, r.serial_ms / r.parallel_ms, r.max_diff);
    }

    {
        const Mesh1D mesh = Mesh1D::graded(96, eps * eps);
        auto sol = std::make_shared<Solution1D>(
            solve_pressure(assemble_system(geom, ctx, mesh, phys)));
        const FieldSampleGrid grid = FieldSampleGrid::box(*geom, {-0.4, -0.4, 0.05},
                                                          {0.6, 0.4, 1.2}, {12, 10, 14});
        auto run = [&] {
            const ExteriorPressure q(ctx, sol);
            std::vector<double> vals(grid.points.size(), 0.0);
            par::parallel_for(static_cast<std::int64_t>(grid.points.size()), [&](std::int64_t i) {
                const auto& pt = grid.points[static_cast<std::size_t>(i)];
                if (pt.tag != FieldSampleGrid::Tag::Interior)
                    vals[static_cast<std::size_t>(i)] = q(pt.x);
            });
            return vals;
        };
        const BenchResult r = bench(run);
        std::printf("%-28s %12.1f %12.1f %8.2fx %10.2e\n", "exterior field sampling",
                    r.serial_ms, r.parallel_ms, r.serial_ms / r.parallel_ms, r.max_diff);
    }

    return 0;
}
