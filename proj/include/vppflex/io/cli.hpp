#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vppflex::io {

/// Process exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitSolver = 2, kExitConfig = 3 };

/// Runs the command line `args` (program name first). Results go to `out`;
/// failures are reported on `err` as one JSON object per line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vppflex::io
