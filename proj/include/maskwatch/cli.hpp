#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace maskwatch::cli {

enum ExitCode : int { ok = 0, failure = 1, input_error = 2 };

/// Runs the `maskwatch` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace maskwatch::cli
