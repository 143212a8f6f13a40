#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace robust_mspca::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (args[0] is the program name). Returns the
/// process exit code: 0 success, 1 runtime error, 2 usage error.
int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

}  // namespace robust_mspca::cli
