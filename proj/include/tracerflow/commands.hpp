#pragma once

#include "tracerflow/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tracerflow {

enum class Command { validate, field, decay, tracer, ergodic, chain };

std::optional<Command> command_from_string(std::string_view name);
std::string_view to_string(Command c);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 1;
inline constexpr int numerical = 2;
inline constexpr int validation = 3;
}  // namespace exit_code

struct RunManifest {
  std::string command;
  std::string version;
  std::uint64_t config_hash = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> run_seeds;
  std::string started;
  std::string finished;
};

struct RunOptions {
  std::string out;       // empty: cfg.output.path
  unsigned threads = 1;
};

/// Runs one subcommand and writes its artifacts. Returns an exit code;
/// diagnostics go to `log`. Config and numerical exceptions are mapped to
/// their exit codes here.
int run_command(Command cmd, const ExperimentConfig& cfg, const RunOptions& options, std::ostream& log);

/// Artifact text with manifest lines removed ('#' header lines and the
/// {"probe":"manifest"} JSONL record). Two runs of the same config compare
/// equal under this projection.
std::string strip_manifest(std::string_view text);

std::string version_string();

}  // namespace tracerflow
