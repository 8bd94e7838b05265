#pragma once

#include "tracerflow/spectrum.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tracerflow {

enum class OutputFormat { csv, jsonl };

struct SimulationConfig {
  double dt = 1e-3;
  double horizon = 10.0;  // "T"
  int ensemble = 16;
  int record_every = 1;
  std::uint64_t seed = 0;
};

struct ProbeConfig {
  std::string observable = "tanh_norm";  // tanh_norm | velocity | indicator
  int component = 1;                     // 1-based, velocity observable
  double delta = 1.0;
  double eps = 1.0;
  std::vector<double> offsets{1.0, 0.5, 0.25, 0.125};
  std::vector<double> horizons;          // empty: {T/4, T}
  double R = 1.0;
  int n = 1;
};

struct ChainConfig {
  std::vector<double> x{1.0, 1.5, 2.0};
  int n_max = 40;
  std::uint64_t paths = 100000;
};

struct OutputConfig {
  OutputFormat format = OutputFormat::csv;
  std::string path = "tracerflow_out";
};

/// Validated experiment description. Every field has a documented default
/// except the seed, which must be given.
struct ExperimentConfig {
  PowerLawSpectrum spectrum;
  SimulationConfig simulation;
  ProbeConfig probe;
  ChainConfig chain;
  OutputConfig output;
};

/// Parses a JSON document. Unknown keys and constraint violations throw
/// ConfigError naming the field path. Top-level "dimension", "K" and "seed"
/// are accepted as shorthands for spectrum.dimension, spectrum.K and
/// simulation.seed.
ExperimentConfig parse_config(std::string_view text);

/// Canonical (sectioned, fully defaulted) JSON form. parse_config of its dump
/// reproduces the config.
nlohmann::json to_json(const ExperimentConfig& cfg);
std::string serialize_config(const ExperimentConfig& cfg);

/// FNV-1a 64 of the canonical compact dump.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hash_hex(std::uint64_t h);

}  // namespace tracerflow
