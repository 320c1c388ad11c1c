#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace claimnet::tools {

/// Runs one `claimnet` command line. Results go to `out` unless --out names
/// a file; diagnostics go to `err`. Returns the process exit code.
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace claimnet::tools
