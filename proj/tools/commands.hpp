#pragma once

#include "checks.hpp"
#include "config.hpp"

#include <functional>
#include <iosfwd>

namespace waveapost::cli {

struct DumpOptions {
    std::optional<std::filesystem::path> mesh;
    std::optional<std::filesystem::path> trajectory;
    std::optional<std::filesystem::path> matrix;
};

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kConfigError = 2, kSolverError = 3 };

int cmd_run(const RunConfig& cfg, const DumpOptions& dumps, std::ostream& out);
int cmd_convergence(const RunConfig& cfg, int levels, std::ostream& out, std::ostream& err);
int cmd_check(const CheckOptions& options, std::ostream& out);

/// Runs `body`, mapping configuration problems to exit code 2 and solver
/// failures to 3; messages go to `err`.
int guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace waveapost::cli
