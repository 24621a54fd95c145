#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace normest::cli {

enum ExitCode : int { kOk = 0, kNegative = 1, kUsage = 2 };

/// Runs one `normest` subcommand. `args` includes the program name.
/// Returns 0 on success, 1 when the estimate is infeasible or certification
/// fails (the report is still written), 2 on usage or input errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace normest::cli
