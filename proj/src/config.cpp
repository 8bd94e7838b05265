#include "tracerflow/config.hpp"

#include "tracerflow/errors.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace tracerflow {

using nlohmann::json;

namespace {

// Reads one JSON object section, remembering which keys were consumed so the
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where("") + " must be an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  template <typename Fn>
  void read(const std::string& key, Fn&& fn) {
    if (!node_.contains(key)) return;
    seen_.insert(key);
    fn(node_.at(key), where(key));
  }

  void number(const std::string& key, double& out) {
    read(key, [&](const json& v, const std::string& p) {
      if (!v.is_number()) throw ConfigError(p + " must be a number");
      out = v.get<double>();
      if (!std::isfinite(out)) throw ConfigError(p + " must be finite");
    });
  }

  void integer(const std::string& key, int& out) {
    read(key, [&](const json& v, const std::string& p) {
      if (!v.is_number_integer()) throw ConfigError(p + " must be an integer");
      out = v.get<int>();
    });
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    read(key, [&](const json& v, const std::string& p) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ConfigError(p + " must be a nonnegative integer");
      }
      out = v.get<std::uint64_t>();
    });
  }

  void string(const std::string& key, std::string& out) {
    read(key, [&](const json& v, const std::string& p) {
      if (!v.is_string()) throw ConfigError(p + " must be a string");
      out = v.get<std::string>();
    });
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    read(key, [&](const json& v, const std::string& p) {
      if (!v.is_array()) throw ConfigError(p + " must be an array of numbers");
      out.clear();
      for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(p + " must be an array of numbers");
        out.push_back(x.get<double>());
      }
    });
  }

  void finish(const std::set<std::string>& extra_allowed = {}) const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.contains(key) && !extra_allowed.contains(key)) {
        throw ConfigError("unknown key '" + where(key) + "'");
      }
    }
  }

  std::string where(const std::string& key) const {
    if (path_.empty()) return key;
    return key.empty() ? path_ : path_ + "." + key;
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  ExperimentConfig cfg;
  Section top(doc, "");
  const json empty = json::object();
  auto section = [&](const std::string& name) -> const json& {
    return doc.contains(name) ? doc.at(name) : empty;
  };

  {
    Section s(section("spectrum"), "spectrum");
    auto& sp = cfg.spectrum;
    s.integer("dimension", sp.dimension);
    s.integer("K", sp.truncation);
    s.number("sigma0", sp.sigma0);
    s.number("decay_p", sp.decay_p);
    std::string projection(to_string(sp.projection));
    s.string("projection", projection);
    s.number("gamma_K0", sp.gamma_K0);
    s.number("gamma_exp", sp.gamma_exp);
    s.integer("m", sp.m);
    s.number("alpha", sp.alpha);
    s.finish();
    try {
      sp.projection = projection_from_string(projection);
    } catch (const std::invalid_argument&) {
      throw ConfigError("spectrum.projection must be one of full, incompressible, potential");
    }
    if (top.has("dimension")) {
      require(!s.has("dimension"), "dimension given both at top level and in spectrum");
      top.integer("dimension", sp.dimension);
    }
    if (top.has("K")) {
      require(!s.has("K"), "K given both at top level and in spectrum");
      top.integer("K", sp.truncation);
    }
    require(sp.dimension >= 1, "spectrum.dimension must be >= 1");
    require(sp.truncation >= 1, "spectrum.K must be >= 1");
    require(sp.sigma0 > 0.0, "spectrum.sigma0 must be positive");
    require(sp.decay_p > 0.0, "spectrum.decay_p must be positive");
    require(sp.gamma_K0 > 0.0, "spectrum.gamma_K0 must be positive");
    require(sp.gamma_exp >= 1.0, "spectrum.gamma_exp must be >= 1");
    require(sp.m >= 0, "spectrum.m must be >= 0");
    require(sp.alpha > 0.0 && sp.alpha < 1.0, "spectrum.alpha must lie in (0,1)");
  }

  {
    Section s(section("simulation"), "simulation");
    auto& sim = cfg.simulation;
    s.number("dt", sim.dt);
    s.number("T", sim.horizon);
    s.integer("ensemble", sim.ensemble);
    s.integer("record_every", sim.record_every);
    bool has_seed = s.has("seed");
    s.unsigned64("seed", sim.seed);
    s.finish();
    if (top.has("seed")) {
      require(!has_seed, "seed given both at top level and in simulation");
      top.unsigned64("seed", sim.seed);
      has_seed = true;
    }
    require(has_seed, "simulation.seed is required");
    require(sim.dt > 0.0, "simulation.dt must be positive");
    require(sim.horizon >= sim.dt, "simulation.T must be >= simulation.dt");
    require(sim.ensemble >= 1, "simulation.ensemble must be >= 1");
    require(sim.record_every >= 1, "simulation.record_every must be >= 1");
  }

  {
    Section s(section("probe"), "probe");
    auto& p = cfg.probe;
    s.string("observable", p.observable);
    s.integer("component", p.component);
    s.number("delta", p.delta);
    s.number("eps", p.eps);
    s.numbers("offsets", p.offsets);
    s.numbers("horizons", p.horizons);
    s.number("R", p.R);
    s.integer("n", p.n);
    s.finish();
    require(p.observable == "tanh_norm" || p.observable == "velocity" || p.observable == "indicator",
            "probe.observable must be one of tanh_norm, velocity, indicator");
    require(p.component >= 1 && p.component <= cfg.spectrum.dimension, "probe.component must be in [1, dimension]");
    require(p.delta > 0.0, "probe.delta must be positive");
    require(p.eps > 0.0, "probe.eps must be positive");
    require(!p.offsets.empty(), "probe.offsets must be nonempty");
    for (std::size_t i = 0; i < p.offsets.size(); ++i) {
      require(p.offsets[i] >= 0.0, "probe.offsets must be nonnegative");
      require(i == 0 || p.offsets[i] <= p.offsets[i - 1], "probe.offsets must be sorted decreasing");
    }
    require(p.horizons.empty() || p.horizons.size() >= 2, "probe.horizons needs at least two entries");
    for (std::size_t i = 0; i < p.horizons.size(); ++i) {
      require(p.horizons[i] > 0.0, "probe.horizons must be positive");
      require(i == 0 || p.horizons[i] > p.horizons[i - 1], "probe.horizons must increase");
    }
    require(p.R >= 0.0, "probe.R must be nonnegative");
    require(p.n >= 1, "probe.n must be >= 1");
  }

  {
    Section s(section("chain"), "chain");
    auto& c = cfg.chain;
    s.numbers("x", c.x);
    s.integer("n_max", c.n_max);
    s.unsigned64("paths", c.paths);
    s.finish();
    require(!c.x.empty(), "chain.x must be nonempty");
    for (double x : c.x) require(std::isfinite(x), "chain.x entries must be finite");
    require(c.n_max >= 1 && c.n_max <= 40, "chain.n_max must be in [1, 40]");
    require(c.paths >= 2, "chain.paths must be >= 2");
  }

  {
    Section s(section("output"), "output");
    std::string format = cfg.output.format == OutputFormat::csv ? "csv" : "jsonl";
    s.string("format", format);
    s.string("path", cfg.output.path);
    s.finish();
    require(format == "csv" || format == "jsonl", "output.format must be csv or jsonl");
    cfg.output.format = format == "csv" ? OutputFormat::csv : OutputFormat::jsonl;
  }

  top.finish({"spectrum", "simulation", "probe", "chain", "output"});
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  const auto& sp = cfg.spectrum;
  const auto& sim = cfg.simulation;
  const auto& p = cfg.probe;
  json j;
  j["spectrum"] = {{"dimension", sp.dimension},
                   {"K", sp.truncation},
                   {"sigma0", sp.sigma0},
                   {"decay_p", sp.decay_p},
                   {"projection", std::string(to_string(sp.projection))},
                   {"gamma_K0", sp.gamma_K0},
                   {"gamma_exp", sp.gamma_exp},
                   {"m", sp.m},
                   {"alpha", sp.alpha}};
  j["simulation"] = {{"dt", sim.dt},
                     {"T", sim.horizon},
                     {"ensemble", sim.ensemble},
                     {"record_every", sim.record_every},
                     {"seed", sim.seed}};
  j["probe"] = {{"observable", p.observable}, {"component", p.component}, {"delta", p.delta},
                {"eps", p.eps},               {"offsets", p.offsets},     {"horizons", p.horizons},
                {"R", p.R},                   {"n", p.n}};
  j["chain"] = {{"x", cfg.chain.x}, {"n_max", cfg.chain.n_max}, {"paths", cfg.chain.paths}};
  j["output"] = {{"format", cfg.output.format == OutputFormat::csv ? "csv" : "jsonl"}, {"path", cfg.output.path}};
  return j;
}

std::string serialize_config(const ExperimentConfig& cfg) { return to_json(cfg).dump(2); }

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  json j = to_json(cfg);
  // The output location does not change results.
  j.erase("output");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tracerflow
