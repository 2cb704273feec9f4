#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mmse::cli {

/// Exit codes shared by all commands.
enum ExitCode : int {
    kOk = 0,
    kUsageOrIo = 1,
    kNotConverged = 2,
    kCheckFailed = 3,
    kInconclusive = 4,
};

/// Runs the `mmse` command line; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mmse::cli
