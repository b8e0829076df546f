#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "perfusion/errors.hpp"
#include "perfusion/harness.hpp"
#include "perfusion/parallel.hpp"

using namespace perfusion;

namespace {

void print_checks(const nlohmann::json& report) {
    if (!report.contains("checks")) return;
    for (const auto& c : report.at("checks")) {
        std::cout << (c.at("passed").get<bool>() ? "[PASS] " : "[FAIL] ")
                  << c.at("name").get<std::string>() << "  measured=" << c.at("measured")
                  << " threshold=" << c.at("threshold") << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thin-vessel perfusion models: 1D slender-body solver, field "
                 "reconstruction, and a coupled 3D-1D boundary-element reference"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name

    std::string config_path;
    std::string out_dir;
    int threads = 0;
    std::uint64_t seed = 42;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
    app.add_option("--seed", seed, "seed for randomized checks");

    auto* solve1d = app.add_subcommand("solve-1d", "solve the 1D integrodifferential model");
    auto* solve3d1d =
        app.add_subcommand("solve-3d1d", "solve the coupled 3D-1D system and compare to 1D");
    auto* sweep = app.add_subcommand("sweep", "epsilon sweep with fitted convergence slopes");
    auto* validate = app.add_subcommand("validate", "run the full property suite");
    auto* sample = app.add_subcommand("sample-fields", "sample fields onto a CSV grid");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = config_path.empty() ? RunConfig::from_json(nlohmann::json::object())
                                            : RunConfig::from_file(config_path);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        par::set_threads(threads);

        CommandResult result;
        if (solve1d->parsed()) result = cmd_solve_1d(cfg, seed);
        if (solve3d1d->parsed()) result = cmd_solve_3d1d(cfg, seed);
        if (sweep->parsed()) result = cmd_sweep(cfg, seed);
        if (validate->parsed()) result = cmd_validate(cfg, seed);
        if (sample->parsed()) result = cmd_sample_fields(cfg, seed);

        print_checks(result.report);
        std::cout << "config_hash=" << result.report.at("config_hash").get<std::string>()
                  << " exit=" << result.exit_code << "\n";
        return result.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
