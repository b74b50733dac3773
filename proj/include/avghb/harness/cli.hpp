#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace avghb::harness {

// Exit codes of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAllDiverged = 3;

// Subcommands: run <config>, tune <config>, deviation <flags>,
// datasets inspect <path>. `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace avghb::harness
