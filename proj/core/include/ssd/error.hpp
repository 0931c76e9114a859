#pragma once

#include <stdexcept>
#include <string>

namespace ssd {

/// Process exit codes used by the CLI.
enum class ExitCode : int {
    ok = 0,
    config = 2,
    numeric = 3,
    non_convergence = 4,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

/// Malformed configuration, CLI flags or input files.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ExitCode::config, what) {}
};

/// Overflow, non-finite values, or an iterative kernel that failed numerically.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ExitCode::numeric, what) {}
};

/// An iterative solver ran out of its iteration budget.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(ExitCode::non_convergence, what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace ssd
