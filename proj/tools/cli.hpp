#pragma once

#include <iosfwd>

namespace mcsd {

/// Entry point of mcsd-bench. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mcsd
