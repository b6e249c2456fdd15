#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace conceptpose::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNoConsensus = 2;

/// Runs the command line in-process. `args` excludes the program name.
/// Machine-readable output goes to `out`, logs and usage to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace conceptpose::cli
