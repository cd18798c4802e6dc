#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace csm::cli {

enum ExitCode : int {
  kOk = 0,
  kVerificationFailure = 1,
  kBadInput = 2,
  kNumericFailure = 3,
  kNoBetheSolutions = 4,
};

/// Runs one command line (without the program name). Results go to `out`
/// unless --output is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace csm::cli
