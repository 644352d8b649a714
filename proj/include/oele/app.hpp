#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace oele {

inline constexpr const char* kToolVersion = "0.1.0";

// Entry point of the `oele` command. args excludes the program name.
// Returns the process exit status; diagnostics go to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace oele
