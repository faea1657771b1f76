#pragma once

#include <exception>
#include <ostream>

namespace ved {

inline constexpr const char* kVersion = "0.1.0";

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,     // bad config, flags or missing config file
  kExitData = 3,       // unreadable or inconsistent data, shape and statistics errors
  kExitNumerical = 4,  // solver failure or training divergence
};

int exit_code_for(const std::exception& e);

/// Entry point behind the ved_cli binary. Progress goes to `log`.
int run_cli(int argc, const char* const* argv, std::ostream& log);

}  // namespace ved
