#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cubepad::cli {

// Runs one command line (without the program name). Returns the exit code:
// 0 success, 1 data or processing error, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cubepad::cli
