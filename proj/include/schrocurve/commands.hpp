#pragma once

#include "schrocurve/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

namespace schrocurve {

/// Options shared by every subcommand; unset values fall back to the config.
struct CommandOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<unsigned> workers;
};

struct CommandResult {
  nlohmann::json manifest;
  std::filesystem::path directory;
  bool pass = true;
};

/// Applies --seed/--out overrides and resolves the seed.
RunConfig apply_options(RunConfig cfg, const CommandOptions& opts);

/// --workers, else monte_carlo.workers, else SCHROCURVE_WORKERS / hardware.
unsigned resolve_workers(const RunConfig& cfg, const CommandOptions& opts);

CommandResult cmd_simulate(const RunConfig& cfg, const CommandOptions& opts);
CommandResult cmd_verify(const std::string& suite, const RunConfig& cfg, const CommandOptions& opts);
CommandResult cmd_noise_sample(const RunConfig& cfg, const CommandOptions& opts);
/// Text report; returns the same numbers as a JSON object.
nlohmann::json cmd_info(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);

/// Every file in the manifest exists and matches its checksum.
bool manifest_closed(const std::filesystem::path& directory, std::string* problem = nullptr);

const char* code_version();

}  // namespace schrocurve
