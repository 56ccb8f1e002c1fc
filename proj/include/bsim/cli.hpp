#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bsim::cli {

// Entry point for the bsimetrics tool; args excludes the program name.
// Returns the process exit code: 0 success, 1 data/query errors, 2 usage.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

} // namespace bsim::cli
