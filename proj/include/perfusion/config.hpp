#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "perfusion/geometry.hpp"
#include "perfusion/greens.hpp"
#include "perfusion/mesh1d.hpp"
#include "perfusion/solver1d.hpp"

namespace perfusion {

struct CenterlineConfig {
    std::string kind = "straight";  // straight | arc | polynomial
    double arc_radius = 0.8;
    std::vector<double> poly_x, poly_y, poly_z;
};

struct RadiusConfig {
    std::string kind = "spheroidal";  // spheroidal | tabulated | linear
    std::vector<double> tab_s, tab_a;
    double linear_c0 = 1.0, linear_c1 = 0.0;
};

struct GeometryConfig {
    CenterlineConfig centerline;
    RadiusConfig radius;
    double epsilon = 0.05;
    GeometrySettings settings;
};

struct NumericsConfig {
    int n_cells = 96;
    double grading = 2.0;
    double h_min = 0.0;  // 0 -> epsilon^2
    int n_theta = 16;
    int quad_order_regular = 8;
    int quad_order_singular = 8;
    double proximity_factor = 3.0;
    int bem_n_theta = 16;
    double bem_near_factor = 3.0;
    int bem_order_near = 6;
    int bem_order_self = 4;
};

struct SweepConfig {
    std::vector<double> epsilons = {0.1, 0.05, 0.025};
    std::vector<int> n_cells = {64, 96, 144};  // scalar broadcast allowed in JSON
    bool run_bem = true;
    bool run_theta_variation = true;
};

struct SampleConfig {
    std::string kind = "box";  // box | surface
    Vec3 lo{-0.3, -0.3, 0.0};
    Vec3 hi{0.3, 0.3, 1.2};
    std::array<int, 3> n{8, 8, 12};
    int n_s = 32;
    int n_theta = 16;
    std::string quantity = "exterior_pressure";  // exterior_pressure | velocity
};

struct RunConfig {
    GeometryConfig geometry;
    PhysicsParams physics;
    NumericsConfig numerics;
    SweepConfig sweep;
    SampleConfig sample;
    std::string output_dir = "out";
    std::string output_prefix = "run";

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig from_file(const std::string& path);
    nlohmann::json to_json() const;  // canonical, every default spelled out
    std::string hash() const;        // FNV-1a over the canonical dump

    std::shared_ptr<const VesselGeometry> build_geometry() const;
    Mesh1D build_mesh() const;       // uses n_cells and h_min (or eps^2)
    Mesh1D build_mesh(int n_cells, double epsilon) const;
    KernelContext kernel_context() const;
};

} // namespace perfusion
