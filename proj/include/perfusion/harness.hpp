#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "perfusion/config.hpp"

namespace perfusion {

/// Exit codes shared by the CLI: 0 success, 2 config error, 3 numerical
/// failure, 4 failed acceptance-tagged check.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNumerical = 3,
    kExitAcceptance = 4,
};

struct CommandResult {
    int exit_code = kExitOk;
    nlohmann::json report;
};

CommandResult cmd_solve_1d(const RunConfig& cfg, std::uint64_t seed);
CommandResult cmd_solve_3d1d(const RunConfig& cfg, std::uint64_t seed);
CommandResult cmd_sweep(const RunConfig& cfg, std::uint64_t seed);
CommandResult cmd_validate(const RunConfig& cfg, std::uint64_t seed);
CommandResult cmd_sample_fields(const RunConfig& cfg, std::uint64_t seed);

/// Least-squares slope of log(val) against log(eps); the corrected variant
/// divides val by |log eps| first.
double loglog_slope(const std::vector<double>& eps, const std::vector<double>& val,
                    bool log_corrected);

} // namespace perfusion
