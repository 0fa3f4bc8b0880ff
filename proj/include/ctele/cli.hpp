#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ctele::cli {

/// Stable process exit codes.
enum ExitCode : int {
    kSuccess = 0,
    kCheckFailed = 1,   // a scientific check failed
    kConfigError = 2,
    kTableDiscrepancy = 3,
};

/// Runs one command line (without the program name). Reports go to `out`
/// unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ctele::cli
