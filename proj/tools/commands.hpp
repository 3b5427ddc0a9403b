#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nnlogit::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDataError = 3,
  kNumericalError = 4,
};

/// Parses `args` (without the program name) and runs one subcommand.
/// Reports go to the --out file when given, otherwise to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Applies NNLOGIT_NUM_THREADS to the OpenMP runtime when set.
void apply_thread_env(std::ostream& err);

}  // namespace nnlogit::cli
