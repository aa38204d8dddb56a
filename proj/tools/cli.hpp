#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ez::cli {

/// Exit codes shared by every subcommand.
enum Exit : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kArtifact = 3,
    kInfeasible = 4,
    kDivergence = 5,
};

/// Runs one command line (args exclude the program name). Normal output goes to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ez::cli
