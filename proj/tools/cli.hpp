#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace safegen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitToolError = 1;
inline constexpr int kExitFail = 2;
inline constexpr int kExitUsage = 64;

/// Entry point shared by the binary and the tests. argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace safegen::cli
