#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "tbem/config.hpp"

namespace tbem {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitNonConvergence = 2,
    kExitInternal = 3,
    kExitVerifyFailed = 4,
};

struct RunOptions {
    std::filesystem::path out_dir = ".";
    std::uint64_t seed = 0;
    bool quiet = false;
    /// Test hook for verify: the named check gets an impossible threshold.
    std::optional<std::string> tamper;
};

/// Boundaries of a config discretized at N (both counterclockwise).
struct Problem {
    DiscreteBoundary outer;
    DiscreteBoundary inner;
};

Problem discretize_problem(const ProblemConfig &cfg, std::size_t n);

/// Solver options from the config; picard_A becomes a constant field on n inner nodes.
SolverOptions solver_options(const ProblemConfig &cfg, std::size_t n);

int cmd_solve(const ProblemConfig &cfg, const RunOptions &opts);
int cmd_perturb(const ProblemConfig &cfg, const RunOptions &opts);
int cmd_convergence(const ProblemConfig &cfg, const RunOptions &opts);
int cmd_verify(const ProblemConfig &cfg, const RunOptions &opts);

/// Loads the config and dispatches; maps failures onto the exit-code contract.
int run_command(const std::string &command, const std::string &config_path, const RunOptions &opts);

}  // namespace tbem
