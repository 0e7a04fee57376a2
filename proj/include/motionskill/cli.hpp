#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace motionskill::cli {

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on a validation error, 2 on an I/O error.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace motionskill::cli
