#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace leakscope::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kStageOrder = 3,
  kOracleExhausted = 4,
};

// Runs the command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace leakscope::cli
