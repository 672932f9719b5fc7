#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace riemap {

/// Runs the riemap command line (args excludes the program name).
/// Returns 0 when every verdict passes, 1 when a verdict fails and 2 on
/// usage, scene or configuration errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker count from RIEMAP_THREADS, defaulting to the hardware concurrency.
int worker_count();

}  // namespace riemap
