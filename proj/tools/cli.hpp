#pragma once

#include <ostream>

namespace spectv::cli {

enum ExitCode : int {
  kSuccess = 0,
  kRuntimeFailure = 1,
  kUsage = 2,
  kInputFormat = 3,
  kDivergence = 4,
};

/// Runs one `spectv` command line. Diagnostics go to `err`, reports to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spectv::cli
