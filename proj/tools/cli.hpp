#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace polynet::cli {

// Exit codes shared by every command.
enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kInput = 2,
  kConstruction = 3,
  kVerification = 4,
  kDivergence = 5,
};

/// Runs one command line (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace polynet::cli
