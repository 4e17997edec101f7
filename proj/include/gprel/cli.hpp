#pragma once

#include <string>
#include <vector>

namespace gprel::cli {

// Exit codes shared by all subcommands.
enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kBadFlags = 2,
  kDataError = 3,
  kFitOrMethodError = 4,
  kAllMethodsFailed = 5,
};

int run(int argc, char** argv);
int run(const std::vector<std::string>& args);  // args[0] is the program name

}  // namespace gprel::cli
