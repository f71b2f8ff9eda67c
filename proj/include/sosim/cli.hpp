#pragma once

#include <iosfwd>

namespace sosim {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 1,       // usage, parse, schema, validation, file errors
  kExitSimulation = 2,  // anything raised while simulating
};

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace sosim
