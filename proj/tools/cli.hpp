#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ssa::cli {

/// Runs the `ssa` command line; `args` excludes the program name.
/// Returns 0 on success, 1 on invalid input or usage, 2 when a computation
/// fails on valid input.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace ssa::cli
