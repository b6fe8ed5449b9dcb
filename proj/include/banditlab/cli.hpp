#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace banditlab {

// Exit codes: 0 success, 1 validation error (bad flags, config, input files),
// 2 runtime fault or failed check.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace banditlab
