#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vbsim/config.hpp"

namespace vbsim {

inline constexpr const char* kVersion = "0.1.0";

enum class Command { kSimulate, kEquilibrium, kSpectral, kGsa, kTransect };

std::optional<Command> parse_command(const std::string& name);
std::string command_name(Command c);

struct CommandOptions {
    int workers = 1;
    std::optional<std::uint64_t> seed;     // overrides the config seed
    std::optional<std::string> out_dir;    // overrides the config output_dir
};

struct CommandResult {
    int exit_code = 0;
    std::string out_dir;
    std::vector<std::string> artifacts;  // file names relative to out_dir, manifest excluded
    std::string error;
};

/// Runs one subcommand and writes its CSV artifacts plus manifest.json
/// (config hash, versions, seed, wall time, artifact list, metrics, and the
/// error on failure) into the output directory. Never throws for model errors.
CommandResult run_command(Command command, const RunConfig& config, const CommandOptions& options);

/// Same, starting from a config file; config errors are reported in the manifest too.
CommandResult run_command_file(Command command, const std::string& config_path, const CommandOptions& options);

/// Cells sampled for index maps: all cells when `count` covers the domain,
/// otherwise an evenly strided subset in cell order.
std::vector<int> map_cells(std::size_t cells, int count);

} // namespace vbsim
