#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mvem {

// Exit statuses: 0 success, 1 failed acceptance criterion or invariant
// check, 2 configuration error, 3 runtime failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCriterionFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace mvem
