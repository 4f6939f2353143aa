#pragma once

#include <iosfwd>

#include "bellsim/run_config.hpp"

namespace bellsim {

inline constexpr const char* kToolVersion = "0.1.0";

// Each command writes '#'-prefixed header metadata (tool version and a
// sorted echo of the effective config) followed by its data rows. Output is
// a pure function of the config: no timestamps, %.17g for reals.
void cmd_protocol(const RunConfig& config, std::ostream& out);
void cmd_stats(const RunConfig& config, std::ostream& out, std::ostream* classes_out);
void cmd_mc(const RunConfig& config, std::ostream& out, std::ostream* trials_out);
void cmd_optimize(const RunConfig& config, std::ostream& out);
void cmd_levels(const RunConfig& config, std::ostream& out);

// Opens the configured output files (stdout when a path is empty) and
// dispatches to the subcommand. Errors propagate as exceptions.
int run_command(const RunConfig& config);

}  // namespace bellsim
