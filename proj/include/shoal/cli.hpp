#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shoal::cli {

/// Entry point of the `shoal` tool. Subcommands: track, evaluate, simulate,
/// analyze, plot. Returns the process exit code (0 iff no errors).
int run(int argc, char** argv);

/// Same as above with explicit arguments (without the program name) and
/// output streams.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shoal::cli
