#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace igs {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidationFailure = 1,
  kExitUsage = 2,
  kExitNumerical = 3,
};

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace igs
