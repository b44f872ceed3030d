#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace causalrag::cli {

/// Entry point behind the `causalrag` binary. `args[0]` is the program name.
/// Returns the process exit code: 0 on success, 1 on runtime errors and the
/// CLI11 code for usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Text printed by --version.
std::string version_text();

} // namespace causalrag::cli
