#pragma once

// Command-line front end.  Every subcommand reads a flat JSON config
// (--config), applies --key value overrides, writes the resolved config to
// the output directory and then its own CSV/JSON files there.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "srd/serialization.hpp"

namespace srd::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNumeric = 2 };

/// Config defaults for a subcommand ("simulate", "exit-sweep", ...).
Json default_config(std::string_view command);

/// defaults <- file <- overrides, with type checks.  Throws ContractError.
Json resolve_config(std::string_view command, const Json& file, const Json& overrides);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace srd::cli
