#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace cohstate::cli {

// Exit codes.
inline constexpr int kPass = 0;
inline constexpr int kNumericFailure = 1;
inline constexpr int kConfigError = 2;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "COHSTATE_OUT_DIR";

/// Keys accepted by a subcommand ("state", "verify", "landau", "measure", "model-card").
const std::vector<std::string>& allowed_keys(const std::string& command);

/// Flags win over the file. Unknown keys and unknown commands throw ConfigInvalid.
nlohmann::json merge_config(const std::string& command, const nlohmann::json& file,
                            const nlohmann::json& overrides);

struct CommandResult {
  int exit_code = kPass;
  nlohmann::json report;
  std::vector<std::string> artifacts;  // files written, report included
  std::string summary;                 // human table rendered from the report
};

/// Runs a validated config. Domain errors inside checks become failures in the
/// report; ConfigInvalid propagates.
CommandResult run_command(const std::string& command, const nlohmann::json& config);

/// Full entry point: argv parsing, config file, execution, exit code.
int main_entry(int argc, char** argv);

}  // namespace cohstate::cli
