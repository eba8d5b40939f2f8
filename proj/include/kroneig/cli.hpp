#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kroneig {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes shared by every command.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitIo = 3,
    kExitDimension = 4,
    kExitNumerical = 5,
};

/// Entry point of the `kroneig` executable. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kroneig
