#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jointgen::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kInternalError = 3,
};

/// Runs one command. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace jointgen::cli
