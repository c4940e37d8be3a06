#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace octree::cli {

// Runs one command line (args[0] is the program name). Returns the process
// exit status; diagnostics go to `err`, results to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace octree::cli
