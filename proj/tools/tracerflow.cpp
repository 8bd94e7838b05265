#include "tracerflow/commands.hpp"
#include "tracerflow/config.hpp"
#include "tracerflow/errors.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
  using namespace tracerflow;
  CLI::App app{"Spectral Monte-Carlo passive-tracer simulator"};
  app.set_version_flag("--version", version_string());

  std::string subcommand, config_path, out_path;
  std::uint64_t seed_override = 0;
  unsigned threads = 1;
  app.add_option("subcommand", subcommand, "validate | field | decay | tracer | ergodic | chain")
      ->required()
      ->check(CLI::IsMember({"validate", "field", "decay", "tracer", "ergodic", "chain"}));
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--out", out_path, "output file (default: output.path from the config)");
  auto* seed_opt = app.add_option("--seed-override", seed_override, "replace simulation.seed");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code::config;
  }

  ExperimentConfig cfg;
  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config '" + config_path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    cfg = parse_config(text.str());
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_code::config;
  }
  if (*seed_opt) cfg.simulation.seed = seed_override;

  const int code = run_command(*command_from_string(subcommand), cfg, RunOptions{out_path, threads}, std::cerr);
  if (code == exit_code::ok) std::cerr << subcommand << ": ok\n";
  return code;
}
