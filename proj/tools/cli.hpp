#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace radtrack::cli {

/// Entry point of the `radtrack` command. args[0] is the program name.
/// Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Environment variable naming a directory searched for relative config paths.
inline constexpr const char* kConfigDirEnv = "RADTRACK_CONFIG_DIR";

}  // namespace radtrack::cli
