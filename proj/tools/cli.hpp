#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cbfrrt::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,      // bad arguments, unreadable or invalid files
  kExhausted = 2,  // a planner or tracker ran out of budget
  kUnsafe = 3,     // verify found a barrier violation
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cbfrrt::cli
