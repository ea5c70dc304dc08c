#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace beamtrain {

enum class ExitCode : int {
  ok = 0,
  usage = 2,
  config = 3,
  io = 4,
  runtime = 5,
};

/// Entry point of the `beamtrain` tool. `args` excludes the program name.
/// Subcommands: run, sweep, overhead, pattern.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, const char* const* argv);

}  // namespace beamtrain
