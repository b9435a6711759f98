#pragma once

// Command-line front end. Exit codes: 0 success, 1 verdict failure under
// --strict, 2 input error, 3 budget exhausted.

#include <ostream>
#include <string>
#include <vector>

namespace ptss {

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ptss
