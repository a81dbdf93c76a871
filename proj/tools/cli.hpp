#pragma once

#include <iosfwd>

namespace rwt::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kComputationError = 2, kAuditFailure = 3 };

/// Parses argv, runs one subcommand and writes the result document to `out`.
/// Diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rwt::cli
