#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ubsfc {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;  // unknown scenario, invalid config, bad flags
inline constexpr int kExitSfc = 3;    // stock-flow consistency abort

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version_string();

}  // namespace ubsfc
