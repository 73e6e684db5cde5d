#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slepian::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kMissingInput = 2,
  kNonconvergence = 3,
  kEmptyIntersection = 4,
  kGridMismatch = 5,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_file(const std::string& path);

}  // namespace slepian::cli
