#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reins::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kSimulationAssertion = 3,
    kVerificationFailure = 4,
};

/// Runs `reins <subcommand> ...` with `args` excluding the program name.
/// Results go to `out`, warnings, errors and the run manifest to `err`
/// (the manifest is also written to --out DIR when given).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace reins::cli
