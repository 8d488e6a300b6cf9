#pragma once

#include <ostream>

namespace exciton::cli {

/// Parses argv and runs one subcommand. Returns the process exit code:
/// 0 success, 1 failed validation, 2 invalid flags or input, 3 numerical
/// failure, 4 I/O failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace exciton::cli
