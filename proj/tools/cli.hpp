#pragma once

#include <iosfwd>

namespace hoie::cli {

// Runs one subcommand. Returns 0 on success, 1 when the inputs fail
// validation (or oracle-check is out of tolerance), 2 on a usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace hoie::cli
