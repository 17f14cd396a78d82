#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace corelens::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kFileError = 2,
  kAnalysisError = 3,
};

/// Runs one command line (without the program name). Human-readable output
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace corelens::cli
