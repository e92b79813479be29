#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fpk::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFail = 2;

/// `args` excludes the program name. Reports go to files given by flags, otherwise to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

/// "1,0" -> {1, 0}. Throws ConfigError.
std::vector<double> parse_point(const std::string& text);

}  // namespace fpk::cli
