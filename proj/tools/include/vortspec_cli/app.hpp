#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vortspec::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kTolerance = 3 };

// Full command line dispatch; argv[0] is the program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace vortspec::cli
