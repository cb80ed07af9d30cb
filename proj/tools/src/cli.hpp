#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace glra::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kInvariantFailure = 3, kInternalError = 4 };

/// Runs one command line (without the program name). Reports go to `out` unless
/// --report names a file; diagnostics and errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace glra::cli
