#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qme/cli/config.hpp"

namespace qme::cli {

// Files written by a command plus the JSON summary it printed to disk.
struct CommandResult {
    std::vector<std::filesystem::path> files;
    nlohmann::json summary;
};

CommandResult cmd_relax(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_qme(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_spectra(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_krylov(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_theory(const RunConfig& cfg, const std::filesystem::path& out_dir);

enum ExitCode : int {
    kExitSuccess = 0,
    kExitIoError = 1,
    kExitConfigError = 2,
    kExitNumericalFailure = 3,
};

// Loads the config, runs `command` and maps failures to exit codes. An empty
// `out_dir` falls back to output.directory from the config. Diagnostics go
// to `err`, the list of written files to `log`.
int run_command(const std::string& command, const std::filesystem::path& config_path,
                const std::filesystem::path& out_dir, std::ostream& log, std::ostream& err);

}  // namespace qme::cli
