#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace idnet::cli {

enum ExitCode : int
{
  kOk = 0,
  kArgument = 2,
  kIo = 3,
  kNumerical = 4,
  kSelftest = 5,
};

// Runs one command line (args excludes the program name). Diagnostics go to
// err as a single line; regular output (CSV rows, selftest report) to out.
int run(std::vector<std::string> const &args, std::ostream &out, std::ostream &err);

} // namespace idnet::cli
