#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

namespace mlpot {

inline constexpr const char* kLibraryVersion = "0.1.0";

using Config = nlohmann::ordered_json;

/// Defaults, then the file contents, then the overrides (JSON merge patch).
/// Validates the kernel string and the command name.
Config resolve_config(const Config& file, const Config& overrides);

/// Executes config["command"] and writes artifacts to config["out_dir"].
/// Returns 0 on success, 2 when a theorem hypothesis is not met, 1 on error.
int run(const Config& config, std::ostream& out, std::ostream& err);

/// Full command line entry point: `<subcommand> [--config file] [flags]`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mlpot
