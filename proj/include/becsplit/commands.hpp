#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "becsplit/config.hpp"

namespace becsplit {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitNumericalFailure = 2,
  kExitNonConvergence = 3,
};

struct CliOptions {
  std::filesystem::path config;  // empty: built-in defaults
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::vector<std::string> artifacts;
};

// Each command writes into out_dir: config.json (the resolved config),
// run.log, and its results. Progress also goes to `log`.
int cmd_design_square(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_design_moment(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_evaluate(const RunConfig& cfg, const std::vector<std::string>& artifacts,
                 const std::filesystem::path& out_dir, std::ostream& log);
int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& out_dir, int workers, std::ostream& log);

// Loads the config, applies overrides and dispatches. Maps exceptions to
// exit codes.
int run_command(const std::string& command, const CliOptions& options, std::ostream& log);

}  // namespace becsplit
