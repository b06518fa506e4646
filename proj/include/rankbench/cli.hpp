#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rankbench {

/// Entry point for the `rankbench` executable. Returns the process exit code:
/// 0 on success, 1 on a runtime failure, 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv);

}  // namespace rankbench
