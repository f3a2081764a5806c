#pragma once

#include <string>
#include <vector>

namespace salctx::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kInputParse = 3,
  kPrecondition = 4,
  kInternal = 5,
};

// Runs one subcommand; args excludes the program name. Diagnostics go to
// stderr.
int run(const std::vector<std::string>& args);

}  // namespace salctx::cli
