#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ddnet {

enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 2,
  kExitPreclassify = 3,
  kExitTraining = 4,
  kExitIo = 5,
};

/// Entry point behind the `ddnet` executable. `args` excludes the program
/// name. Subcommands: synth, preclassify, train, infer, run, eval, sweep.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ddnet
