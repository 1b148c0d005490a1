#pragma once

#include <iosfwd>

namespace thresholds::cli {

// Process exit status by failure class.
enum ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kNotConverged = 2,
  kIo = 3,
};

/// Worker threads when --threads is absent: THRESHOLDS_THREADS if set to a
/// positive integer, otherwise 0 (all hardware threads).
unsigned default_threads();

/// Entry point of the `thresholds` executable. Regular output goes to `out`,
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace thresholds::cli
