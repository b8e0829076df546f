#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "perfusion/harness.hpp"

using namespace perfusion;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig small_config(const std::string& dir) {
    json j;
    j["geometry"] = {{"epsilon", 0.05}};
    j["numerics"] = {{"n_cells", 32}, {"n_theta", 8}, {"bem_n_theta", 8}};
    j["output"] = {{"dir", dir}, {"prefix", "t"}};
    return RunConfig::from_json(j);
}

} // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("config defaults, canonical dump and hash stability") {
    const RunConfig a = RunConfig::from_json(json::object());
    const RunConfig b = RunConfig::from_json(json{{"physics", {{"mu", 1.0}}}});
    CHECK(a.hash() == b.hash());  // explicit default == implicit default
    CHECK(a.to_json().at("numerics").at("n_cells") == 96);
    const RunConfig c = RunConfig::from_json(json{{"physics", {{"mu", 2.0}}}});
    CHECK(a.hash() != c.hash());
}

TEST_CASE("config rejects invalid input") {
    CHECK_THROWS_AS(RunConfig::from_json(json{{"geometry", {{"epsilon", -0.1}}}}), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json(json{{"physics", {{"zeta", 0.0}}}}), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json(json{{"sweep", {{"epsilons", {0.05, 0.1}}}}}),
                    ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json(json{{"geometry", {{"centerline", {{"kind", "spiral"}}}}}})
                        .build_geometry(),
                    ConfigError);
    CHECK_THROWS_AS(RunConfig::from_file("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("loglog_slope recovers exact power laws") {
    const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> v;
    for (double e : eps) v.push_back(3.0 * e * std::sqrt(e));
    CHECK(loglog_slope(eps, v, false) == doctest::Approx(1.5).epsilon(1e-12));
    std::vector<double> w;
    for (double e : eps) w.push_back(2.0 * e * std::abs(std::log(e)));
    CHECK(loglog_slope(eps, w, true) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("solve-1d writes artifacts and a kappa = 0 run degenerates cleanly") {
    const std::string dir = "/tmp/perfusion_test_solve1d";
    std::filesystem::remove_all(dir);
    RunConfig cfg = small_config(dir);
    cfg.physics.kappa = 0.0;
    const CommandResult res = cmd_solve_1d(cfg, 42);
    CHECK(res.exit_code == kExitOk);
    CHECK(std::filesystem::exists(dir + "/t_solution1d.csv"));
    CHECK(std::filesystem::exists(dir + "/t_report.json"));
    CHECK(std::abs(res.report.at("results").at("boundary_flux").get<double>()) < 1e-12);
    CHECK(std::abs(res.report.at("results").at("tip_face_flux").get<double>()) < 1e-12);
    CHECK(res.report.at("results").at("theta_variation_surface").get<double>() < 1e-12);
    CHECK(res.report.at("results").at("p_tip").get<double>() == doctest::Approx(1.0));
}

TEST_CASE("reruns with the same config hash are bit-identical") {
    const std::string d1 = "/tmp/perfusion_test_det1";
    const std::string d2 = "/tmp/perfusion_test_det2";
    std::filesystem::remove_all(d1);
    std::filesystem::remove_all(d2);
    RunConfig c1 = small_config(d1);
    RunConfig c2 = small_config(d2);
    const CommandResult r1 = cmd_solve_1d(c1, 7);
    const CommandResult r2 = cmd_solve_1d(c2, 7);
    CHECK(r1.report.at("config_hash") == r2.report.at("config_hash"));
    CHECK(read_file(d1 + "/t_solution1d.csv") == read_file(d2 + "/t_solution1d.csv"));
}

TEST_CASE("solve-3d1d produces the comparison report with conservation") {
    const std::string dir = "/tmp/perfusion_test_solve3d1d";
    std::filesystem::remove_all(dir);
    const RunConfig cfg = small_config(dir);
    const CommandResult res = cmd_solve_3d1d(cfg, 42);
    CHECK(res.exit_code == kExitOk);
    CHECK(std::filesystem::exists(dir + "/t_bem_pressure.csv"));
    CHECK(std::filesystem::exists(dir + "/t_bem_panels.csv"));
    CHECK(std::filesystem::exists(dir + "/t_compare.json"));
    const auto& cmp = res.report.at("results").at("compare");
    CHECK(cmp.at("conservation_rel").get<double>() < 1e-4);
    CHECK(cmp.at("ha_error").get<double>() > 0.0);
}

TEST_CASE("invalid geometry exits with the config code") {
    const std::string dir = "/tmp/perfusion_test_badgeom";
    std::filesystem::remove_all(dir);
    RunConfig cfg = small_config(dir);
    cfg.geometry.radius.kind = "linear";
    cfg.geometry.radius.linear_c0 = 1.3;  // violates sup |a| = 1
    cfg.geometry.radius.linear_c1 = -0.4;
    const CommandResult res = cmd_solve_1d(cfg, 42);
    CHECK(res.exit_code == kExitConfig);
}

TEST_CASE("sweep needs at least 3 epsilon points") {
    RunConfig cfg = small_config("/tmp/perfusion_test_sweep_bad");
    cfg.sweep.epsilons = {0.1, 0.05};
    cfg.sweep.n_cells = {16, 16};
    CHECK_THROWS_AS(cmd_sweep(cfg, 42), ConfigError);
}

TEST_CASE("sweep slopes are invariant under p0 doubling") {
    const std::string d1 = "/tmp/perfusion_test_sweep1";
    const std::string d2 = "/tmp/perfusion_test_sweep2";
    std::filesystem::remove_all(d1);
    std::filesystem::remove_all(d2);
    RunConfig c1 = small_config(d1);
    c1.geometry.centerline.kind = "arc";
    c1.sweep.epsilons = {0.1, 0.05, 0.025};
    c1.sweep.n_cells = {24, 24, 24};
    c1.sweep.run_bem = false;  // theta-variation slope only, keep it fast
    RunConfig c2 = c1;
    c2.output_dir = d2;
    c2.physics.p0 = 2.0;
    const CommandResult r1 = cmd_sweep(c1, 42);
    const CommandResult r2 = cmd_sweep(c2, 42);
    const double s1 = r1.report.at("slopes").at("theta_variation_raw").get<double>();
    const double s2 = r2.report.at("slopes").at("theta_variation_raw").get<double>();
    CHECK(std::abs(s1 - s2) < 1e-12);
}

TEST_CASE("validate passes on the default configuration") {
    const std::string dir = "/tmp/perfusion_test_validate";
    std::filesystem::remove_all(dir);
    RunConfig cfg = small_config(dir);
    cfg.numerics.n_cells = 64;
    const CommandResult res = cmd_validate(cfg, 42);
    for (const auto& c : res.report.at("checks")) {
        INFO(c.at("name").get<std::string>(), " measured=", c.at("measured").get<double>());
        CHECK(c.at("passed").get<bool>());
    }
    CHECK(res.exit_code == kExitOk);
    CHECK(std::filesystem::exists(dir + "/t_validate.json"));
}

TEST_CASE("sample-fields writes exterior and velocity grids") {
    const std::string dir = "/tmp/perfusion_test_sample";
    std::filesystem::remove_all(dir);
    RunConfig cfg = small_config(dir);
    cfg.sample.kind = "box";
    cfg.sample.n = {5, 5, 6};
    const CommandResult r1 = cmd_sample_fields(cfg, 42);
    CHECK(r1.exit_code == kExitOk);
    CHECK(r1.report.at("results").at("points_written").get<int>() > 0);

    cfg.sample.quantity = "velocity";
    const CommandResult r2 = cmd_sample_fields(cfg, 42);
    CHECK(r2.exit_code == kExitOk);
    const std::string csv = read_file(dir + "/t_field.csv");
    CHECK(csv.rfind("x,y,z,ux,uy,uz", 0) == 0);
}

TEST_SUITE_END();
