#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hpm::app {

/// Runs the `hpm` command line with `args` (program name excluded).
/// Returns the process exit code.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace hpm::app
