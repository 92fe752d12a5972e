#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fnm/config.hpp"

namespace fnm {

/// Exit statuses of the command-line tool.
namespace exit_status {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int usage = 2;
inline constexpr int resource = 3;
inline constexpr int numerical = 4;
inline constexpr int io = 5;
}  // namespace exit_status

int exit_code(ErrorKind kind);

/// git-describe style version baked in at build time.
std::string version();

/// Runs the configured subcommand and writes its artifacts. Returns the exit
/// status; library errors are reported on `err` rather than thrown.
int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_config followed by dispatch.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fnm
