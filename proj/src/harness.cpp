#include "perfusion/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "perfusion/bem.hpp"
#include "perfusion/errors.hpp"
#include "perfusion/fields.hpp"
#include "perfusion/norms.hpp"

namespace perfusion {

namespace {

using nlohmann::json;

class Timer {
  public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

std::string artifact_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.output_dir);
    return (std::filesystem::path(cfg.output_dir) / (cfg.output_prefix + "_" + name)).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write artifact: " + path);
    out << text;
}

void write_json_file(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json base_report(const char* command, const RunConfig& cfg, std::uint64_t seed) {
    json j;
    j["command"] = command;
    j["config"] = cfg.to_json();
    j["config_hash"] = cfg.hash();
    j["seed"] = seed;
    return j;
}

json check_entry(const std::string& name, bool passed, double measured, double threshold) {
    return json{{"name", name}, {"passed", passed}, {"measured", measured}, {"threshold", threshold}};
}

bool all_checks_pass(const json& checks) {
    for (const auto& c : checks)
        if (!c.at("passed").get<bool>()) return false;
    return true;
}

json validation_to_json(const ValidationReport& rep) {
    json checks = json::array();
    for (const auto& c : rep.checks)
        checks.push_back(json{{"name", c.name},
                              {"passed", c.passed},
                              {"measured", c.measured},
                              {"threshold", c.threshold},
                              {"detail", c.detail}});
    return json{{"checks", checks},
                {"c_gamma", rep.c_gamma},
                {"kappa_max", rep.kappa_max},
                {"a_star", rep.a_star},
                {"a_star2", rep.a_star2},
                {"all_passed", rep.all_passed()}};
}

// closed-form potential of a unit line density on the straight pulled-back
// centerline (validation oracle; the tests carry an independent copy)
double sn_one_exact(double rho, double z, double beta, bool halfspace) {
    double v = std::log((beta - z + std::hypot(beta - z, rho)) / (-z + std::hypot(z, rho)));
    if (halfspace)
        v += std::log((beta + z + std::hypot(beta + z, rho)) / (z + std::hypot(z, rho)));
    return v / (4.0 * M_PI * beta);
}

json apriori_to_json(const AprioriRatios& r) {
    return json{{"l2_p", r.l2_p},
                {"l2_a2dp", r.l2_a2dp},
                {"linf_p", r.linf_p},
                {"linf_adp", r.linf_adp},
                {"linf_a3d2p", r.linf_a3d2p}};
}

json compare_to_json(const CompareReport& r) {
    return json{{"ha_error", r.ha_error},
                {"surface_mismatch", r.surface_mismatch},
                {"gradient_proxy_rms", r.gradient_proxy_rms},
                {"conservation_rel", r.conservation_rel},
                {"ha_p_ratio", r.ha_p_ratio},
                {"pq_gap_ratio", r.pq_gap_ratio},
                {"bem_ha_norm", r.bem_ha_norm},
                {"sb_ha_norm", r.sb_ha_norm}};
}

} // namespace

double loglog_slope(const std::vector<double>& eps, const std::vector<double>& val,
                    bool log_corrected) {
    if (eps.size() != val.size() || eps.size() < 2)
        throw ConfigError("slope fit needs matching lists with >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double x = std::log(eps[i]);
        const double denom = log_corrected ? std::abs(std::log(eps[i])) : 1.0;
        const double y = std::log(std::max(val[i], 1e-300) / denom);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// solve-1d
// ---------------------------------------------------------------------------
CommandResult cmd_solve_1d(const RunConfig& cfg, std::uint64_t seed) {
    Timer timer;
    json rep = base_report("solve-1d", cfg, seed);

    auto geom = cfg.build_geometry();
    const ValidationReport vrep = validate_admissible(*geom);
    rep["geometry_validation"] = validation_to_json(vrep);
    if (!vrep.all_passed()) {
        rep["error"] = "geometry failed admissibility validation";
        write_json_file(artifact_path(cfg, "report.json"), rep);
        return {kExitConfig, rep};
    }

    const KernelContext ctx = cfg.kernel_context();
    const Mesh1D mesh = cfg.build_mesh();
    Timer solve_timer;
    auto sol = std::make_shared<Solution1D>(
        solve_pressure(assemble_system(geom, ctx, mesh, cfg.physics)));
    rep["timings_ms"]["solve"] = solve_timer.ms();

    // artifacts: nodal CSV + machine-readable report
    std::string csv = "s,a,p,F,a4pprime\n";
    for (int i = 0; i < mesh.nodes(); ++i) {
        const double s = mesh.s[static_cast<std::size_t>(i)];
        csv += num(s) + "," + num(geom->radius().value(s)) + "," +
               num(sol->p[static_cast<std::size_t>(i)]) + "," +
               num(sol->F[static_cast<std::size_t>(i)]) + "," + num(sol->flux(s)) + "\n";
    }
    write_text(artifact_path(cfg, "solution1d.csv"), csv);

    rep["results"]["residual"] = sol->residual;
    rep["results"]["ha_norm"] = sol->ha_norm();
    rep["results"]["boundary_flux"] = sol->boundary_flux;
    rep["results"]["tip_face_flux"] = sol->tip_face_flux();
    rep["results"]["p_tip"] = sol->p.back();
    rep["results"]["apriori"] = apriori_to_json(check_apriori_bounds(*sol));

    // flux balance diagnostic (fundamental theorem of calculus on F)
    double intF = 0.0;
    for (int i = 0; i < mesh.cells(); ++i)
        intF += 0.5 * (sol->F[static_cast<std::size_t>(i)] + sol->F[static_cast<std::size_t>(i) + 1]) *
                mesh.cell_width(i);
    rep["results"]["flux_balance"] = intF + sol->boundary_flux - sol->flux(mesh.s.back());

    // field diagnostics
    const ExteriorPressure q(ctx, sol);
    rep["results"]["theta_variation_surface"] = theta_variation_surface(q, cfg.numerics.n_theta);
    const VelocityAnsatz U(sol);
    if (cfg.geometry.centerline.kind == "straight") {
        double worst = 0.0;
        const double scale = std::pow(geom->epsilon(), 4) / (16.0 * cfg.physics.mu);
        for (int i = 0; i < mesh.nodes(); ++i) {
            const double s = mesh.s[static_cast<std::size_t>(i)];
            if (s > U.cutoff().s_inner) break;
            worst = std::max(worst, std::abs(U.wall_flux_density(s, 0.0) -
                                             scale * sol->F[static_cast<std::size_t>(i)]));
        }
        rep["results"]["wall_flux_identity_max_defect"] = worst;
    }

    rep["timings_ms"]["total"] = timer.ms();
    write_json_file(artifact_path(cfg, "report.json"), rep);
    return {kExitOk, rep};
}

// ---------------------------------------------------------------------------
// solve-3d1d
// ---------------------------------------------------------------------------
CommandResult cmd_solve_3d1d(const RunConfig& cfg, std::uint64_t seed) {
    Timer timer;
    json rep = base_report("solve-3d1d", cfg, seed);

    auto geom = cfg.build_geometry();
    const ValidationReport vrep = validate_admissible(*geom);
    rep["geometry_validation"] = validation_to_json(vrep);
    if (!vrep.all_passed()) {
        rep["error"] = "geometry failed admissibility validation";
        write_json_file(artifact_path(cfg, "report.json"), rep);
        return {kExitConfig, rep};
    }

    const KernelContext ctx = cfg.kernel_context();
    const Mesh1D mesh = cfg.build_mesh();
    auto sol = std::make_shared<Solution1D>(
        solve_pressure(assemble_system(geom, ctx, mesh, cfg.physics)));

    BemOptions opts;
    opts.near_factor = cfg.numerics.bem_near_factor;
    opts.order_near = cfg.numerics.bem_order_near;
    opts.order_self = cfg.numerics.bem_order_self;
    Timer bem_timer;
    const BoundaryMesh bm = build_boundary_mesh(geom, mesh, cfg.numerics.bem_n_theta);
    const BemSolution bem = solve_bem(assemble_bem(bm, cfg.physics, opts));
    rep["timings_ms"]["bem"] = bem_timer.ms();

    const CompareReport cmp = compare_to_1d(bem, *sol, ctx);
    rep["results"]["compare"] = compare_to_json(cmp);
    rep["results"]["bem_residual"] = bem.residual;
    rep["results"]["panels"] = static_cast<int>(bm.panels.size());
    rep["results"]["total_area"] = bm.total_area;

    std::string pcsv = "s,p\n";
    const auto locs = bem.pressure_nodes();
    const auto pv = bem.pressure_values();
    for (std::size_t i = 0; i < locs.size(); ++i) pcsv += num(locs[i]) + "," + num(pv[i]) + "\n";
    write_text(artifact_path(cfg, "bem_pressure.csv"), pcsv);

    std::string scsv = "s,theta,sigma,q,dqdn\n";
    for (int j = 0; j < static_cast<int>(bm.panels.size()); ++j) {
        const Panel& p = bm.panels[static_cast<std::size_t>(j)];
        scsv += num(bm.ring_s[static_cast<std::size_t>(p.ring)]) + "," +
                num(0.5 * (p.v0 + p.v1)) + "," + num(bem.sigma[static_cast<std::size_t>(j)]) + "," +
                num(bem.q_surface(j)) + "," + num(bem.dqdn(j)) + "\n";
    }
    write_text(artifact_path(cfg, "bem_panels.csv"), scsv);
    write_json_file(artifact_path(cfg, "compare.json"), compare_to_json(cmp));

    rep["timings_ms"]["total"] = timer.ms();
    write_json_file(artifact_path(cfg, "report.json"), rep);
    return {kExitOk, rep};
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------
CommandResult cmd_sweep(const RunConfig& cfg, std::uint64_t seed) {
    if (cfg.sweep.epsilons.size() < 3)
        throw ConfigError("sweep needs at least 3 epsilon points");
    Timer timer;
    json rep = base_report("sweep", cfg, seed);
    const KernelContext ctx = cfg.kernel_context();

    std::vector<double> epss = cfg.sweep.epsilons;
    std::vector<double> ha_errors, theta_devs;
    json rows = json::array();
    std::string csv = "eps,n_cells,ha_error,theta_variation,l2_p,l2_a2dp,linf_p,linf_adp,linf_a3d2p\n";
    std::vector<AprioriRatios> ratios;

    for (std::size_t k = 0; k < epss.size(); ++k) {
        const double eps = epss[k];
        const int cells = cfg.sweep.n_cells[k];
        RunConfig entry = cfg;
        entry.geometry.epsilon = eps;
        auto geom = entry.build_geometry();
        const Mesh1D mesh = cfg.build_mesh(cells, eps);
        auto sol = std::make_shared<Solution1D>(
            solve_pressure(assemble_system(geom, ctx, mesh, cfg.physics)));
        const AprioriRatios ar = check_apriori_bounds(*sol);
        ratios.push_back(ar);

        double theta_dev = 0.0;
        if (cfg.sweep.run_theta_variation) {
            const ExteriorPressure q(ctx, sol);
            theta_dev = theta_variation_surface(q, cfg.numerics.n_theta) / std::abs(cfg.physics.p0);
            theta_devs.push_back(theta_dev);
        }
        double ha_error = 0.0;
        if (cfg.sweep.run_bem) {
            BemOptions opts;
            opts.near_factor = cfg.numerics.bem_near_factor;
            opts.order_near = cfg.numerics.bem_order_near;
            opts.order_self = cfg.numerics.bem_order_self;
            const BoundaryMesh bm = build_boundary_mesh(geom, mesh, cfg.numerics.bem_n_theta);
            const BemSolution bem = solve_bem(assemble_bem(bm, cfg.physics, opts));
            const CompareReport cmp = compare_to_1d(bem, *sol, ctx);
            ha_error = cmp.ha_error;
            ha_errors.push_back(ha_error);
            rows.push_back(json{{"eps", eps}, {"n_cells", cells}, {"compare", compare_to_json(cmp)},
                                {"apriori", apriori_to_json(ar)}});
        } else {
            rows.push_back(json{{"eps", eps}, {"n_cells", cells}, {"apriori", apriori_to_json(ar)}});
        }
        csv += num(eps) + "," + std::to_string(cells) + "," + num(ha_error) + "," + num(theta_dev) +
               "," + num(ar.l2_p) + "," + num(ar.l2_a2dp) + "," + num(ar.linf_p) + "," +
               num(ar.linf_adp) + "," + num(ar.linf_a3d2p) + "\n";
    }
    rep["entries"] = rows;
    write_text(artifact_path(cfg, "sweep.csv"), csv);

    json slopes;
    json checks = json::array();
    if (!ha_errors.empty()) {
        slopes["ha_error_raw"] = loglog_slope(epss, ha_errors, false);
        slopes["ha_error_log_corrected"] = loglog_slope(epss, ha_errors, true);
        bool monotone = true;
        for (std::size_t i = 1; i < ha_errors.size(); ++i)
            if (!(ha_errors[i] < ha_errors[i - 1])) monotone = false;
        const double best = std::max(slopes["ha_error_raw"].get<double>(),
                                     slopes["ha_error_log_corrected"].get<double>());
        checks.push_back(check_entry("sweep.ha_error_monotone", monotone, monotone ? 1.0 : 0.0, 1.0));
        checks.push_back(check_entry("sweep.ha_error_order", best >= 0.4, best, 0.4));
    }
    if (!theta_devs.empty()) {
        const double raw = loglog_slope(epss, theta_devs, false);
        const double corr = loglog_slope(epss, theta_devs, true);
        slopes["theta_variation_raw"] = raw;
        slopes["theta_variation_log_corrected"] = corr;
        const bool in_window = (raw >= 0.8 && raw <= 1.3) || (corr >= 0.8 && corr <= 1.3);
        checks.push_back(check_entry("sweep.theta_variation_slope", in_window, raw, 0.8));
    }
    // Lemma-style boundedness: no ratio may grow by more than 2x per halving
    bool bounded = true;
    double worst_growth = 0.0;
    for (std::size_t i = 1; i < ratios.size(); ++i) {
        for (auto f : {&AprioriRatios::l2_p, &AprioriRatios::l2_a2dp, &AprioriRatios::linf_p,
                       &AprioriRatios::linf_adp, &AprioriRatios::linf_a3d2p}) {
            const double prev = ratios[i - 1].*f;
            const double cur = ratios[i].*f;
            if (prev > 1e-14) worst_growth = std::max(worst_growth, cur / prev);
        }
    }
    bounded = worst_growth <= 2.0;
    checks.push_back(check_entry("sweep.apriori_bounded_growth", bounded, worst_growth, 2.0));

    rep["slopes"] = slopes;
    rep["checks"] = checks;
    write_json_file(artifact_path(cfg, "slopes.json"), json{{"slopes", slopes}, {"checks", checks}});
    rep["timings_ms"]["total"] = timer.ms();
    write_json_file(artifact_path(cfg, "report.json"), rep);
    return {all_checks_pass(checks) ? kExitOk : kExitAcceptance, rep};
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------
CommandResult cmd_validate(const RunConfig& cfg, std::uint64_t seed) {
    Timer timer;
    json rep = base_report("validate", cfg, seed);
    json checks = json::array();
    auto add = [&checks](const std::string& name, bool pass, double measured, double threshold) {
        checks.push_back(check_entry(name, pass, measured, threshold));
    };

    // -- geometry admissibility ----------------------------------------------
    auto geom = cfg.build_geometry();
    const ValidationReport vrep = validate_admissible(*geom);
    rep["geometry_validation"] = validation_to_json(vrep);
    add("geometry.admissible", vrep.all_passed(), vrep.all_passed() ? 1.0 : 0.0, 1.0);

    const double eps = geom->epsilon();
    const double beta = std::sqrt(1.0 - eps * eps);
    const KernelContext ctx = cfg.kernel_context();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // -- Green's function oracles ---------------------------------------------
    {
        auto straight = std::make_shared<VesselGeometry>(std::make_shared<StraightCenterline>(),
                                                         std::make_shared<SpheroidalRadius>(), eps,
                                                         cfg.geometry.settings);
        const Mesh1D mesh = cfg.build_mesh(64, eps);
        const LineDensity one(mesh.s, std::vector<double>(mesh.s.size(), 1.0));
        SnOperator op(ctx, *straight, mesh.s);

        double worst_off = 0.0;
        for (int k = 0; k < 20; ++k) {
            const double rho = std::max(0.12, 3.0 * eps) + 0.6 * unit(rng);
            const double z = 0.02 + 1.5 * unit(rng);
            const double exact = sn_one_exact(rho, z, beta, true);
            const double got = op.apply(one.f, Vec3{rho, 0.0, z});
            worst_off = std::max(worst_off, std::abs(got - exact) / std::abs(exact));
        }
        add("greens.line_potential_offsurface", worst_off <= 1e-10, worst_off, 1e-10);

        double worst_on = 0.0;
        for (double s : {0.1, 0.4, 0.7, 0.9}) {
            const double rho = eps * straight->radius().value(s);
            const double exact = sn_one_exact(rho, s, beta, true);
            const double got = op.apply(one.f, straight->surface_point(s, 1.0));
            worst_on = std::max(worst_on, std::abs(got - exact) / std::abs(exact));
        }
        add("greens.line_potential_onsurface", worst_on <= 1e-6, worst_on, 1e-6);

        double sym = 0.0;
        for (int k = 0; k < 100; ++k) {
            const Vec3 x{2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0, 0.05 + unit(rng)};
            const Vec3 y{2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0, 0.05 + unit(rng)};
            if (dist(x, y) < 0.05) continue;
            sym = std::max(sym, std::abs(eval_green(ctx, x, y) - eval_green(ctx, y, x)));
        }
        add("greens.symmetry", sym <= 1e-14, sym, 1e-14);

        double wall = 0.0;
        const double h = 1e-5;
        for (int k = 0; k < 20; ++k) {
            const Vec3 y{unit(rng) - 0.5, unit(rng) - 0.5, 0.2 + unit(rng)};
            const Vec3 x{unit(rng) - 0.5, unit(rng) - 0.5, 0.0};
            wall = std::max(wall, std::abs((eval_green(ctx, {x.x, x.y, h}, y) -
                                            eval_green(ctx, {x.x, x.y, -h}, y)) /
                                           (2.0 * h)));
        }
        add("greens.wall_neumann", wall <= 1e-8, wall, 1e-8);

        // harmonicity stencil away from the surface
        std::vector<double> f(mesh.s.size());
        double fmax = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            f[i] = std::sin(2.0 * mesh.s[i]) + 1.0;
            fmax = std::max(fmax, std::abs(f[i]));
        }
        const double hh = 1e-3;
        double lap_worst = 0.0;
        for (const Vec3& p : {Vec3{0.3, 0.1, 0.4}, Vec3{-0.25, 0.2, 0.9}, Vec3{0.2, -0.35, 1.3}}) {
            double lap = -6.0 * op.apply(f, p);
            for (const Vec3& d : {Vec3{hh, 0, 0}, Vec3{-hh, 0, 0}, Vec3{0, hh, 0}, Vec3{0, -hh, 0},
                                  Vec3{0, 0, hh}, Vec3{0, 0, -hh}})
                lap += op.apply(f, p + d);
            lap_worst = std::max(lap_worst, std::abs(lap / (hh * hh)));
        }
        add("greens.harmonicity", lap_worst <= 1e-4 * fmax, lap_worst, 1e-4 * fmax);

        // positivity and linearity
        std::vector<double> fp(mesh.s.size()), g1(mesh.s.size()), g2(mesh.s.size());
        for (std::size_t i = 0; i < fp.size(); ++i) {
            fp[i] = unit(rng);
            g1[i] = 2.0 * unit(rng) - 1.0;
            g2[i] = 2.0 * unit(rng) - 1.0;
        }
        double min_pos = 1e300, lin = 0.0;
        for (int k = 0; k < 20; ++k) {
            const Vec3 p{0.2 + 0.6 * unit(rng), 0.5 * unit(rng), 0.1 + 1.2 * unit(rng)};
            min_pos = std::min(min_pos, op.apply(fp, p));
            std::vector<double> mix(fp.size());
            for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 0.6 * g1[i] - 1.7 * g2[i];
            lin = std::max(lin, std::abs(op.apply(mix, p) - 0.6 * op.apply(g1, p) +
                                         1.7 * op.apply(g2, p)));
        }
        add("greens.positivity", min_pos >= 0.0, min_pos, 0.0);
        add("greens.linearity", lin <= 1e-12, lin, 1e-12);

        // composite-quadrature convergence on the plain path
        KernelContext plain{KernelVariant::FreeSpaceTest};
        plain.enable_subtraction = false;
        plain.order_regular = 2;
        const Vec3 probe{0.08, 0.0, 0.37};
        const double exact = sn_one_exact(0.08, 0.37, beta, false);
        double prev = 0.0, worst_gain = 1e300;
        for (int ncells : {8, 16, 32}) {
            Mesh1D m = Mesh1D::graded(ncells, eps * eps);
            SnOperator pop(plain, *straight, m.s);
            const std::vector<double> onev(m.s.size(), 1.0);
            const double err = std::abs(pop.apply(onev, probe) - exact);
            if (prev > 0.0) worst_gain = std::min(worst_gain, prev / err);
            prev = err;
        }
        add("greens.quadrature_doubling_gain", worst_gain >= 4.0, worst_gain, 4.0);
    }

    // -- weighted Poincare / Hardy sampling ------------------------------------
    {
        const Mesh1D mesh = cfg.build_mesh(256, eps);
        SpheroidalRadius rad;
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> u(mesh.s.size(), 0.0);
            double coef[6];
            for (double& c : coef) c = 2.0 * unit(rng) - 1.0;
            for (std::size_t i = 0; i < u.size(); ++i)
                for (int k = 0; k < 6; ++k)
                    u[i] += coef[k] * std::sin((k + 0.5) * M_PI * mesh.s[i]);
            const double ratio = discrete_l2(mesh.s, u) / weighted_grad_l2(mesh.s, u, rad);
            worst = std::max(worst, ratio);
        }
        add("hardy.random_functions", worst <= 2.05, worst, 2.05);

        // tightening the constant below the measured extremal ratio must fail;
        // u(s) = s sits at ratio ~ 0.79, so the 0.75-tightened check rejects it
        std::vector<double> lin(mesh.s.begin(), mesh.s.end());
        const double ratio_lin = discrete_l2(mesh.s, lin) / weighted_grad_l2(mesh.s, lin, rad);
        add("hardy.tightened_rejects_linear", ratio_lin > 0.75, ratio_lin, 0.75);
    }

    // -- solver exactness and identities ---------------------------------------
    {
        const Mesh1D mesh = cfg.build_mesh(std::min(cfg.numerics.n_cells, 96), eps);
        PhysicsParams zero = cfg.physics;
        zero.kappa = 0.0;
        auto sol0 = solve_pressure(assemble_system(geom, ctx, mesh, zero));
        double dev = 0.0;
        for (std::size_t i = 0; i < sol0.p.size(); ++i) {
            dev = std::max(dev, std::abs(sol0.p[i] - zero.p0));
            dev = std::max(dev, std::abs(sol0.F[i]));
        }
        add("solver.kappa_zero_exact", dev <= 1e-12 * std::abs(zero.p0), dev, 1e-12);

        auto sol = std::make_shared<Solution1D>(
            solve_pressure(assemble_system(geom, ctx, mesh, cfg.physics)));
        add("solver.residual", sol->residual <= 1e-10, sol->residual, 1e-10);
        double intF = 0.0;
        for (int i = 0; i < mesh.cells(); ++i)
            intF += 0.5 * (sol->F[static_cast<std::size_t>(i)] + sol->F[static_cast<std::size_t>(i) + 1]) *
                    mesh.cell_width(i);
        const double balance = std::abs(intF + sol->boundary_flux - sol->flux(mesh.s.back()));
        add("solver.flux_balance", balance <= 1e-8, balance, 1e-8);

        std::vector<double> pbar(sol->p.size());
        for (std::size_t i = 0; i < pbar.size(); ++i) pbar[i] = sol->p[i] - cfg.physics.p0;
        const double ratio = discrete_l2(mesh.s, pbar) /
                             weighted_grad_l2(mesh.s, pbar, geom->radius());
        add("solver.poincare_on_solution", ratio <= 2.05, ratio, 2.05);

        // straight-geometry field identities
        auto straight = std::make_shared<VesselGeometry>(std::make_shared<StraightCenterline>(),
                                                         std::make_shared<SpheroidalRadius>(), eps,
                                                         cfg.geometry.settings);
        auto ssol = std::make_shared<Solution1D>(
            solve_pressure(assemble_system(straight, ctx, mesh, cfg.physics)));
        const VelocityAnsatz U(ssol);
        double div_worst = 0.0, flux_worst = 0.0;
        for (int i = 0; i < mesh.nodes(); ++i) {
            const double s = mesh.s[static_cast<std::size_t>(i)];
            if (s > U.cutoff().s_inner) break;
            const double ra = straight->surface_radius(s);
            div_worst = std::max(div_worst, std::abs(U.divergence(0.5 * ra, 1.1, s)));
            const double target = std::pow(eps, 4) / (16.0 * cfg.physics.mu) *
                                  ssol->F[static_cast<std::size_t>(i)];
            flux_worst = std::max(flux_worst, std::abs(U.wall_flux_density(s, 0.7) - target));
        }
        add("fields.straight_divergence_zero", div_worst == 0.0, div_worst, 0.0);
        add("fields.wall_flux_identity", flux_worst <= 1e-10, flux_worst, 1e-10);
    }

    // -- sphere jump-relation oracle -------------------------------------------
    {
        const BoundaryMesh sphere = build_sphere_mesh(16, 16);
        const std::vector<double> one(sphere.panels.size(), 1.0);
        const auto nd = apply_normal_derivative(sphere, KernelVariant::FreeSpaceTest, one);
        double worst = 0.0;
        for (double v : nd) worst = std::max(worst, std::abs(v + 1.0));
        add("sphere.jump_relation", worst <= 0.02, worst, 0.02);

        // orientation flip: with n negated the operator reports +1, so the
        // oracle catches a sign error loudly
        BoundaryMesh flipped = sphere;
        for (Panel& p : flipped.panels) p.n = -p.n;
        const auto nd_flip = apply_normal_derivative(flipped, KernelVariant::FreeSpaceTest, one, +0.5);
        double mean = 0.0;
        for (double v : nd_flip) mean += v;
        mean /= static_cast<double>(nd_flip.size());
        const bool detects = std::abs(mean - 1.0) < 0.05;  // reports +1, not -1
        add("sphere.flipped_sign_detected", detects, mean, 1.0);
    }

    rep["checks"] = checks;
    rep["all_passed"] = all_checks_pass(checks);
    rep["timings_ms"]["total"] = timer.ms();
    write_json_file(artifact_path(cfg, "validate.json"), rep);
    return {all_checks_pass(checks) ? kExitOk : kExitAcceptance, rep};
}

// ---------------------------------------------------------------------------
// sample-fields
// ---------------------------------------------------------------------------
CommandResult cmd_sample_fields(const RunConfig& cfg, std::uint64_t seed) {
    Timer timer;
    json rep = base_report("sample-fields", cfg, seed);

    auto geom = cfg.build_geometry();
    const KernelContext ctx = cfg.kernel_context();
    const Mesh1D mesh = cfg.build_mesh();
    auto sol = std::make_shared<Solution1D>(
        solve_pressure(assemble_system(geom, ctx, mesh, cfg.physics)));

    FieldSampleGrid grid;
    if (cfg.sample.kind == "box")
        grid = FieldSampleGrid::box(*geom, cfg.sample.lo, cfg.sample.hi, cfg.sample.n);
    else if (cfg.sample.kind == "surface")
        grid = FieldSampleGrid::surface_lattice(*geom, cfg.sample.n_s, cfg.sample.n_theta,
                                                mesh.s.back());
    else
        throw ConfigError("unknown sample kind: " + cfg.sample.kind);

    std::string csv;
    int written = 0;
    if (cfg.sample.quantity == "exterior_pressure") {
        const ExteriorPressure q(ctx, sol);
        csv = "x,y,z,q\n";
        for (const auto& p : grid.points) {
            if (p.tag == FieldSampleGrid::Tag::Interior) continue;
            csv += num(p.x.x) + "," + num(p.x.y) + "," + num(p.x.z) + "," + num(q(p.x)) + "\n";
            ++written;
        }
    } else if (cfg.sample.quantity == "velocity") {
        const VelocityAnsatz U(sol);
        csv = "x,y,z,ux,uy,uz\n";
        for (const auto& p : grid.points) {
            if (p.tag == FieldSampleGrid::Tag::Exterior) continue;
            const Vec3 u = U.cartesian(std::min(p.r, geom->surface_radius(p.s)), p.theta, p.s);
            csv += num(p.x.x) + "," + num(p.x.y) + "," + num(p.x.z) + "," + num(u.x) + "," +
                   num(u.y) + "," + num(u.z) + "\n";
            ++written;
        }
    } else {
        throw ConfigError("unknown sample quantity: " + cfg.sample.quantity);
    }
    write_text(artifact_path(cfg, "field.csv"), csv);

    rep["results"]["points_total"] = static_cast<int>(grid.points.size());
    rep["results"]["points_written"] = written;
    rep["results"]["quantity"] = cfg.sample.quantity;
    rep["timings_ms"]["total"] = timer.ms();
    write_json_file(artifact_path(cfg, "field_manifest.json"), rep);
    return {kExitOk, rep};
}

} // namespace perfusion
