#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace xroute {

/// Runs one CLI command. `args` excludes the program name. Data goes to `out`
/// (or the --out file), errors to `err` as `code: message`. Returns the
/// process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xroute
