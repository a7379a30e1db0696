#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace retrial {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 1 numeric failure or failed reproduction,
/// 2 usage error.
int run_cli(std::vector<std::string> args, std::ostream& out,
            std::ostream& err);

/// Expands `--config FILE` into the flags it lists. The file holds one
/// `key = value` per line (`#` starts a comment); flags given on the command
/// line win over the file because they come later.
std::vector<std::string> expand_config(std::vector<std::string> args);

}  // namespace retrial
