#pragma once

#include <iosfwd>

namespace gradscan::cli {

/// Stable process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kIoError = 1,
  kUsageError = 2,
  kRefusedOverwrite = 3,
};

/// Runs one subcommand (patterns, simulate, calibrate, reconstruct,
/// unreflect-pose) and returns its exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gradscan::cli
