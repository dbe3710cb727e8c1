#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mobisim::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 1,      ///< bad flags, invalid config, I/O failure
    kNumericalError = 2,  ///< integrator or calibration start failure
    kNoResult = 3,        ///< requested event/analysis produced nothing
};

/// Runs the command line `args` (without the program name), writing the
/// human summary to `out` and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mobisim::cli
