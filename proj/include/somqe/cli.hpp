#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace somqe::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kIoError = 2,
  kInternalError = 3,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace somqe::cli
