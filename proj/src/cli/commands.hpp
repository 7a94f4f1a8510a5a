#pragma once

namespace spdc::cli {

// Parses argv, runs one subcommand (or a figure preset / manifest re-run) and
// writes its output files.  Returns the process exit code:
//   0 success, 2 usage error, 3 validation error, 4 non-convergence.
int run(int argc, char** argv);

}  // namespace spdc::cli
