#include "perfusion/config.hpp"

#include <fstream>

#include "perfusion/errors.hpp"

namespace perfusion {

namespace {

using nlohmann::json;

double get_num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(std::string(key) + " must be a number");
    return j.at(key).get<double>();
}

int get_int(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
    return j.at(key).get<int>();
}

std::vector<double> get_vec(const json& j, const char* key) {
    std::vector<double> v;
    if (j.contains(key)) v = j.at(key).get<std::vector<double>>();
    return v;
}

} // namespace

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    return from_json(j);
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig cfg;
    if (j.contains("geometry")) {
        const json& g = j.at("geometry");
        if (g.contains("centerline")) {
            const json& c = g.at("centerline");
            cfg.geometry.centerline.kind = c.value("kind", std::string("straight"));
            cfg.geometry.centerline.arc_radius = get_num(c, "radius", 0.8);
            cfg.geometry.centerline.poly_x = get_vec(c, "x");
            cfg.geometry.centerline.poly_y = get_vec(c, "y");
            cfg.geometry.centerline.poly_z = get_vec(c, "z");
        }
        if (g.contains("radius")) {
            const json& r = g.at("radius");
            cfg.geometry.radius.kind = r.value("kind", std::string("spheroidal"));
            cfg.geometry.radius.tab_s = get_vec(r, "s");
            cfg.geometry.radius.tab_a = get_vec(r, "a");
            cfg.geometry.radius.linear_c0 = get_num(r, "c0", 1.0);
            cfg.geometry.radius.linear_c1 = get_num(r, "c1", 0.0);
        }
        cfg.geometry.epsilon = get_num(g, "epsilon", 0.05);
        cfg.geometry.settings.a0 = get_num(g, "a0", 0.25);
        cfg.geometry.settings.delta = get_num(g, "delta", 0.1);
        cfg.geometry.settings.tip_constant = get_num(g, "tip_constant", 10.0);
        cfg.geometry.settings.c_gamma_min = get_num(g, "c_gamma_min", 1e-3);
        cfg.geometry.settings.frame_samples = get_int(g, "frame_samples", 2048);
        cfg.geometry.settings.validation_samples = get_int(g, "validation_samples", 512);
    }
    if (j.contains("physics")) {
        const json& p = j.at("physics");
        cfg.physics.mu = get_num(p, "mu", 1.0);
        cfg.physics.kappa = get_num(p, "kappa", 1.0);
        cfg.physics.zeta = get_num(p, "zeta", 1.0);
        cfg.physics.p0 = get_num(p, "p0", 1.0);
    }
    if (j.contains("numerics")) {
        const json& n = j.at("numerics");
        cfg.numerics.n_cells = get_int(n, "n_cells", 96);
        cfg.numerics.grading = get_num(n, "grading", 2.0);
        cfg.numerics.h_min = get_num(n, "h_min", 0.0);
        cfg.numerics.n_theta = get_int(n, "n_theta", 16);
        cfg.numerics.quad_order_regular = get_int(n, "quad_order_regular", 8);
        cfg.numerics.quad_order_singular = get_int(n, "quad_order_singular", 8);
        cfg.numerics.proximity_factor = get_num(n, "proximity_factor", 3.0);
        cfg.numerics.bem_n_theta = get_int(n, "bem_n_theta", 16);
        cfg.numerics.bem_near_factor = get_num(n, "bem_near_factor", 3.0);
        cfg.numerics.bem_order_near = get_int(n, "bem_order_near", 6);
        cfg.numerics.bem_order_self = get_int(n, "bem_order_self", 4);
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        if (s.contains("epsilons")) cfg.sweep.epsilons = s.at("epsilons").get<std::vector<double>>();
        if (s.contains("n_cells")) {
            if (s.at("n_cells").is_number_integer())
                cfg.sweep.n_cells.assign(cfg.sweep.epsilons.size(), s.at("n_cells").get<int>());
            else
                cfg.sweep.n_cells = s.at("n_cells").get<std::vector<int>>();
        } else if (s.contains("epsilons")) {
            cfg.sweep.n_cells.assign(cfg.sweep.epsilons.size(), cfg.numerics.n_cells);
        }
        cfg.sweep.run_bem = s.value("bem", true);
        cfg.sweep.run_theta_variation = s.value("theta_variation", true);
    }
    if (j.contains("sample")) {
        const json& s = j.at("sample");
        cfg.sample.kind = s.value("kind", std::string("box"));
        auto getv3 = [&](const char* key, Vec3 fb) {
            if (!s.contains(key)) return fb;
            const auto v = s.at(key).get<std::vector<double>>();
            if (v.size() != 3) throw ConfigError(std::string(key) + " must have 3 entries");
            return Vec3{v[0], v[1], v[2]};
        };
        cfg.sample.lo = getv3("lo", cfg.sample.lo);
        cfg.sample.hi = getv3("hi", cfg.sample.hi);
        if (s.contains("n")) {
            const auto v = s.at("n").get<std::vector<int>>();
            if (v.size() != 3) throw ConfigError("sample.n must have 3 entries");
            cfg.sample.n = {v[0], v[1], v[2]};
        }
        cfg.sample.n_s = get_int(s, "n_s", 32);
        cfg.sample.n_theta = get_int(s, "n_theta", 16);
        cfg.sample.quantity = s.value("quantity", std::string("exterior_pressure"));
    }
    if (j.contains("output")) {
        cfg.output_dir = j.at("output").value("dir", std::string("out"));
        cfg.output_prefix = j.at("output").value("prefix", std::string("run"));
    }

    // validation of cross-field invariants
    if (!(cfg.geometry.epsilon > 0.0 && cfg.geometry.epsilon < 0.5))
        throw ConfigError("epsilon must lie in (0, 0.5)");
    if (!(cfg.physics.mu > 0.0) || !(cfg.physics.zeta > 0.0) || cfg.physics.kappa < 0.0)
        throw ConfigError("physics constants must be positive (kappa may be zero)");
    if (cfg.numerics.n_cells < 4) throw ConfigError("n_cells must be >= 4");
    if (cfg.numerics.n_theta < 4) throw ConfigError("n_theta must be >= 4");
    if (cfg.numerics.h_min < 0.0) throw ConfigError("h_min must be nonnegative");
    for (std::size_t i = 1; i < cfg.sweep.epsilons.size(); ++i)
        if (!(cfg.sweep.epsilons[i] < cfg.sweep.epsilons[i - 1]))
            throw ConfigError("sweep epsilons must be strictly decreasing");
    if (cfg.sweep.n_cells.size() != cfg.sweep.epsilons.size())
        throw ConfigError("sweep n_cells must match the epsilon list (or be scalar)");
    return cfg;
}

nlohmann::json RunConfig::to_json() const {
    json c;
    c["kind"] = geometry.centerline.kind;
    if (geometry.centerline.kind == "arc") c["radius"] = geometry.centerline.arc_radius;
    if (geometry.centerline.kind == "polynomial") {
        c["x"] = geometry.centerline.poly_x;
        c["y"] = geometry.centerline.poly_y;
        c["z"] = geometry.centerline.poly_z;
    }
    json r;
    r["kind"] = geometry.radius.kind;
    if (geometry.radius.kind == "tabulated") {
        r["s"] = geometry.radius.tab_s;
        r["a"] = geometry.radius.tab_a;
    }
    if (geometry.radius.kind == "linear") {
        r["c0"] = geometry.radius.linear_c0;
        r["c1"] = geometry.radius.linear_c1;
    }
    json j;
    j["geometry"] = {{"centerline", c},
                     {"radius", r},
                     {"epsilon", geometry.epsilon},
                     {"a0", geometry.settings.a0},
                     {"delta", geometry.settings.delta},
                     {"tip_constant", geometry.settings.tip_constant},
                     {"c_gamma_min", geometry.settings.c_gamma_min},
                     {"frame_samples", geometry.settings.frame_samples},
                     {"validation_samples", geometry.settings.validation_samples}};
    j["physics"] = {{"mu", physics.mu}, {"kappa", physics.kappa}, {"zeta", physics.zeta}, {"p0", physics.p0}};
    j["numerics"] = {{"n_cells", numerics.n_cells},
                     {"grading", numerics.grading},
                     {"h_min", numerics.h_min},
                     {"n_theta", numerics.n_theta},
                     {"quad_order_regular", numerics.quad_order_regular},
                     {"quad_order_singular", numerics.quad_order_singular},
                     {"proximity_factor", numerics.proximity_factor},
                     {"bem_n_theta", numerics.bem_n_theta},
                     {"bem_near_factor", numerics.bem_near_factor},
                     {"bem_order_near", numerics.bem_order_near},
                     {"bem_order_self", numerics.bem_order_self}};
    j["sweep"] = {{"epsilons", sweep.epsilons},
                  {"n_cells", sweep.n_cells},
                  {"bem", sweep.run_bem},
                  {"theta_variation", sweep.run_theta_variation}};
    j["sample"] = {{"kind", sample.kind},
                   {"lo", {sample.lo.x, sample.lo.y, sample.lo.z}},
                   {"hi", {sample.hi.x, sample.hi.y, sample.hi.z}},
                   {"n", {sample.n[0], sample.n[1], sample.n[2]}},
                   {"n_s", sample.n_s},
                   {"n_theta", sample.n_theta},
                   {"quantity", sample.quantity}};
    j["output"] = {{"dir", output_dir}, {"prefix", output_prefix}};
    return j;
}

std::string RunConfig::hash() const {
    // identifies the computation: artifact destinations stay out of the hash
    json j = to_json();
    j.erase("output");
    const std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::shared_ptr<const VesselGeometry> RunConfig::build_geometry() const {
    std::shared_ptr<const Centerline> curve;
    const auto& c = geometry.centerline;
    if (c.kind == "straight")
        curve = std::make_shared<StraightCenterline>();
    else if (c.kind == "arc")
        curve = std::make_shared<ArcCenterline>(c.arc_radius);
    else if (c.kind == "polynomial")
        curve = std::make_shared<PolynomialCenterline>(c.poly_x, c.poly_y, c.poly_z);
    else
        throw ConfigError("unknown centerline kind: " + c.kind);

    std::shared_ptr<const RadiusProfile> radius;
    const auto& r = geometry.radius;
    if (r.kind == "spheroidal")
        radius = std::make_shared<SpheroidalRadius>();
    else if (r.kind == "tabulated")
        radius = std::make_shared<TabulatedRadius>(r.tab_s, r.tab_a);
    else if (r.kind == "linear")
        radius = std::make_shared<LinearRadius>(r.linear_c0, r.linear_c1);
    else
        throw ConfigError("unknown radius kind: " + r.kind);

    return std::make_shared<VesselGeometry>(curve, radius, geometry.epsilon, geometry.settings);
}

Mesh1D RunConfig::build_mesh() const { return build_mesh(numerics.n_cells, geometry.epsilon); }

Mesh1D RunConfig::build_mesh(int n_cells, double epsilon) const {
    const double hm = numerics.h_min > 0.0 ? numerics.h_min : epsilon * epsilon;
    return Mesh1D::graded(n_cells, hm, numerics.grading);
}

KernelContext RunConfig::kernel_context() const {
    KernelContext ctx;
    ctx.variant = KernelVariant::HalfSpaceNeumann;
    ctx.proximity_factor = numerics.proximity_factor;
    ctx.order_regular = numerics.quad_order_regular;
    ctx.order_singular = numerics.quad_order_singular;
    ctx.n_theta = numerics.n_theta;
    return ctx;
}

} // namespace perfusion
