#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dskde {

//! Runs one CLI invocation. `args` excludes the program name. Returns the
//! process exit status; diagnostics go to `err` as a single line.
//!
//! Subcommands: bandwidth, fit, score, detect, simulate, eval. Every
//! subcommand accepts --config FILE; a flag given on the command line wins
//! over the same key in the file, which wins over the built-in default.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace dskde
