#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gom::cli {

// Exit statuses shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kVerificationMismatch = 1,
  kInputError = 2,
  kIdentificationError = 3,
  kPredictionError = 4,
};

// Runs `gom <args...>` (args excludes the program name). Primary outputs go
// to files named by flags or to `out`; messages go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Default worker count: GOM_THREADS when set to a positive integer, else 1.
std::size_t default_threads();

}  // namespace gom::cli
