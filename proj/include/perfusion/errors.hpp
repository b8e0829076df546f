#pragma once

#include <stdexcept>
#include <string>

namespace perfusion {

/// Bad user input: malformed config, inconsistent meshes, out-of-range settings.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error("config: " + msg) {}
};

/// Construction-time geometry rejection (non-unit tangent, degenerate curve, ...).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error("validation: " + msg) {}
};

/// Evaluation outside an operation's domain (s out of [0,1], interior point, ...).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error("domain: " + msg) {}
};

/// Surface quantities are undefined at the degenerate tip s = 1.
struct TipSingularityError : DomainError {
    explicit TipSingularityError(const std::string& msg) : DomainError("tip: " + msg) {}
};

/// Wall-flux evaluation requested outside the cutoff plateau.
struct CutoffZoneError : DomainError {
    explicit CutoffZoneError(const std::string& msg) : DomainError("cutoff zone: " + msg) {}
};

/// Kernel evaluated at (or too close to) a source point.
struct SingularityError : DomainError {
    explicit SingularityError(const std::string& msg) : DomainError("singularity: " + msg) {}
};

/// Assembled system unusable (singular matrix, bad scaling).
struct ConditioningError : std::runtime_error {
    explicit ConditioningError(const std::string& msg) : std::runtime_error("conditioning: " + msg) {}
};

/// Solve finished but residuals exceed the contract.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& msg) : std::runtime_error("convergence: " + msg) {}
};

} // namespace perfusion
