#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nclab::cli {

enum ExitCode : int { ok = 0, validation_error = 1, usage_error = 2 };

/// Runs the command line; JSON results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// Formats with 9 significant digits.
std::string format_number(double v);

}  // namespace nclab::cli
