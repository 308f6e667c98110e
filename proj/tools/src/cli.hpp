#pragma once

#include <iosfwd>

namespace fixpoint::cli {

enum ExitCode : int {
  success = 0,
  failure = 1,
  invalid_arguments = 2,
  convergence_failure = 3,
};

/// Parses and runs one invocation. Results go to `out` (or the --output
/// file), diagnostics and progress to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fixpoint::cli
