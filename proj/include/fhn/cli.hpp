#pragma once

#include <string>
#include <vector>

namespace fhn {

/// Command-line entry point; returns the process exit status. Errors are
/// reported as machine-readable JSON on stdout with a nonzero status.
int run_cli(int argc, const char* const* argv);

/// Convenience overload for tests: args exclude the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace fhn
