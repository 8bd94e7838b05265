#include "tracerflow/commands.hpp"

#include "tracerflow/chain.hpp"
#include "tracerflow/ergodic.hpp"
#include "tracerflow/errors.hpp"
#include "tracerflow/field.hpp"
#include "tracerflow/parallel.hpp"
#include "tracerflow/stats.hpp"
#include "tracerflow/tracer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#ifndef TRACERFLOW_VERSION
#define TRACERFLOW_VERSION "0.0.0"
#endif

namespace tracerflow {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Collects the body of one artifact plus the manifest that heads it.
struct Artifact {
  RunManifest manifest;
  std::ostringstream body;
  std::vector<std::string> notes;  // extra '#' lines for CSV headers
};

json manifest_json(const RunManifest& m, const std::vector<std::string>& notes) {
  json params = {{"command", m.command},       {"version", m.version},   {"run_seeds", m.run_seeds},
                 {"started", m.started},       {"finished", m.finished}, {"notes", notes}};
  return {{"probe", "manifest"}, {"params", params}, {"estimate", nullptr}, {"stderr", nullptr},
          {"seed", m.master_seed}, {"config_hash", hash_hex(m.config_hash)}};
}

void write_artifact(const std::string& path, Artifact& a, bool csv) {
  a.manifest.finished = utc_now();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  const RunManifest& m = a.manifest;
  if (csv) {
    out << "# tracerflow " << m.version << " " << m.command << "\n";
    out << "# config_hash " << hash_hex(m.config_hash) << "\n";
    out << "# master_seed " << m.master_seed << "\n";
    out << "# run_seeds";
    for (auto s : m.run_seeds) out << ' ' << s;
    out << "\n# started " << m.started << "\n# finished " << m.finished << "\n";
    for (const auto& n : a.notes) out << "# " << n << "\n";
  } else {
    out << manifest_json(m, a.notes).dump() << "\n";
  }
  out << a.body.str();
  if (!out) throw NumericalError("write failed for '" + path + "'");
}

class ProbeWriter {
 public:
  ProbeWriter(std::ostream& out, std::uint64_t hash) : out_(out), hash_(hash_hex(hash)) {}

  void write(const std::string& probe, json params, json estimate, json std_error, std::uint64_t seed) {
    json rec = {{"probe", probe},         {"params", std::move(params)}, {"estimate", std::move(estimate)},
                {"stderr", std::move(std_error)}, {"seed", seed}, {"config_hash", hash_}};
    out_ << rec.dump() << "\n";
  }

 private:
  std::ostream& out_;
  std::string hash_;
};

const std::string kSpectrumNote =
    "spectrum: power-law instantiation energy = sigma0 |k|^-decay_p P(k), gamma = gamma_K0 |k|^gamma_exp";

ModelPtr make_model(const ExperimentConfig& cfg) {
  return std::make_shared<const SpectrumModel>(build_power_law_spectrum(cfg.spectrum));
}

ObservableSpec make_observable(const ExperimentConfig& cfg) {
  const auto& p = cfg.probe;
  if (p.observable == "velocity") return ObservableSpec::velocity(static_cast<std::size_t>(p.component - 1));
  if (p.observable == "indicator") return ObservableSpec::indicator(std::nullopt, p.delta);
  return ObservableSpec::tanh_norm();
}

Artifact start_artifact(Command cmd, const ExperimentConfig& cfg) {
  Artifact a;
  a.manifest.command = std::string(to_string(cmd));
  a.manifest.version = version_string();
  a.manifest.config_hash = config_hash(cfg);
  a.manifest.master_seed = cfg.simulation.seed;
  a.manifest.started = utc_now();
  return a;
}

// Seeds for sub-probes live far from the ensemble indices.
std::uint64_t probe_seed(std::uint64_t master, std::uint64_t probe) {
  return derive_seed(master, 0x9000000000000000ULL + probe);
}

int run_validate(const ExperimentConfig& cfg, Artifact& a, std::ostream& log) {
  const auto model = make_model(cfg);
  ProbeWriter w(a.body, a.manifest.config_hash);
  const std::uint64_t seed = cfg.simulation.seed;
  bool ok = true;

  const double gstar = gamma_star(*model);
  w.write("gamma_star", json::object(), gstar, nullptr, seed);

  const int d = model->dimension();
  const bool regular = model->m() > d / 2.0 + 1.0;
  w.write("regularity", {{"m", model->m()}, {"dimension", d}, {"threshold", d / 2.0 + 1.0}}, regular, nullptr, seed);
  if (!regular) {
    log << "validate: m=" << model->m() << " does not exceed d/2+1\n";
    ok = false;
  }

  const double h1 = check_h1(*model);
  const int half = model->truncation() / 2;
  json h1_params = {{"K", model->truncation()}, {"m", model->m()}, {"alpha", model->alpha()}};
  if (half >= 1) {
    const double h1_half = check_h1(model->truncated(half));
    const double change = h1 > 0.0 ? std::abs(h1 - h1_half) / h1 : 0.0;
    const bool converged = change < 0.1;
    h1_params["K_half"] = half;
    h1_params["value_half"] = h1_half;
    h1_params["relative_change"] = change;
    h1_params["converged"] = converged;
    if (!converged) {
      log << "validate: H1 partial sums change by " << change << " between K/2 and K\n";
      ok = false;
    }
  } else {
    h1_params["converged"] = nullptr;
    log << "validate: K=1 leaves no K/2 truncation to compare; H1 convergence not assessed\n";
  }
  w.write("h1", h1_params, h1, nullptr, seed);

  constexpr int kQuadSteps = 40000;
  const double t_max = 40.0 / gstar;
  const H2Report h2 = check_h2(*model, t_max, kQuadSteps);
  json h2_params = {{"t_max", t_max}, {"quad_steps", kQuadSteps}, {"tail_bound", h2.tail_bound}};
  if (half >= 1) {
    const H2Report h2_half = check_h2(model->truncated(half), t_max, kQuadSteps);
    h2_params["K_half"] = half;
    h2_params["value_half"] = h2_half.integral;
    h2_params["relative_change"] = std::abs(h2.integral - h2_half.integral) / h2.integral;
  }
  w.write("h2", h2_params, h2.integral, nullptr, seed);
  if (!std::isfinite(h2.integral + h2.tail_bound)) throw NumericalError("validate: H2 quadrature is not finite");
  return ok ? exit_code::ok : exit_code::validation;
}

// Exact OU lag covariances of the most energetic pairs against the oracle.
int run_field(const ExperimentConfig& cfg, Artifact& a, unsigned threads) {
  const auto model = make_model(cfg);
  ProbeWriter w(a.body, a.manifest.config_hash);
  const auto n = static_cast<std::size_t>(cfg.simulation.ensemble);
  const std::size_t d = model->dimension();

  std::vector<std::size_t> reps(model->representatives().begin(), model->representatives().end());
  std::stable_sort(reps.begin(), reps.end(), [&](std::size_t i, std::size_t j) {
    return model->mode(i).energy.trace().real() > model->mode(j).energy.trace().real();
  });
  reps.resize(std::min<std::size_t>(reps.size(), 4));
  const std::vector<double> lags_in_units{0.0, 0.5, 1.0, 2.0};

  std::vector<std::vector<std::vector<Complex>>> values(n);  // run -> (mode*lags) -> d coefficients at lag
  std::vector<std::vector<Complex>> initial(n);             // run -> (mode) d coefficients at 0
  for (std::size_t r = 0; r < n; ++r) a.manifest.run_seeds.push_back(derive_seed(cfg.simulation.seed, r));

  parallel_for(n, threads, [&](std::size_t r) {
    RandomStream rng(a.manifest.run_seeds[r]);
    const FourierField v0 = sample_stationary(model, rng);
    std::vector<Complex> init;
    std::vector<std::vector<Complex>> lagged;
    for (std::size_t mi : reps) {
      for (std::size_t c = 0; c < d; ++c) init.push_back(v0(mi, c));
      // Exact OU transition of this mode over each lag, chained.
      OUState state{v0, 0.0};
      double t = 0.0;
      for (double u : lags_in_units) {
        const double target = u / model->gamma(mi);
        if (target > t) {
          state = ou_exact_step(state, target - t, rng);
          t = target;
        }
        std::vector<Complex> row;
        for (std::size_t c = 0; c < d; ++c) row.push_back(state.field(mi, c));
        lagged.push_back(std::move(row));
      }
    }
    initial[r] = std::move(init);
    values[r] = std::move(lagged);
  });

  double worst = 0.0;
  for (std::size_t j = 0; j < reps.size(); ++j) {
    const std::size_t mi = reps[j];
    const auto& k = model->mode(mi).k;
    for (std::size_t l = 0; l < lags_in_units.size(); ++l) {
      const double h = lags_in_units[l] / model->gamma(mi);
      ComplexMatrix c = ComplexMatrix::Zero(d, d);
      for (std::size_t r = 0; r < n; ++r) {
        const auto& lagged = values[r][j * lags_in_units.size() + l];
        for (std::size_t p = 0; p < d; ++p) {
          for (std::size_t q = 0; q < d; ++q) c(p, q) += lagged[p] * std::conj(initial[r][j * d + q]);
        }
      }
      c /= static_cast<double>(n);
      const ComplexMatrix oracle = covariance_oracle(*model, h, k);
      const double scale = model->mode(mi).energy.norm();
      const double rel = (c - oracle).norm() / scale;
      worst = std::max(worst, rel);
      json params = {{"k", k.components()}, {"lag", h}, {"ensemble", n}, {"oracle_trace", oracle.trace().real()},
                     {"sample_trace", c.trace().real()}};
      w.write("ou_lag_covariance", params, rel, nullptr, cfg.simulation.seed);
    }
  }
  w.write("ou_lag_covariance_max", {{"ensemble", n}}, worst, 1.0 / std::sqrt(static_cast<double>(n)),
          cfg.simulation.seed);
  return exit_code::ok;
}

int run_decay(const ExperimentConfig& cfg, Artifact& a, std::ostream& log, unsigned threads) {
  const auto model = make_model(cfg);
  ProbeWriter w(a.body, a.manifest.config_hash);
  const auto n = static_cast<std::size_t>(cfg.simulation.ensemble);
  const double dt = cfg.simulation.dt;
  const auto steps = static_cast<long long>(std::llround(cfg.simulation.horizon / dt));
  const double gstar = gamma_star(*model);
  const double m = model->m();
  // Moduli below this are not compared: subnormal arithmetic has no relative accuracy.
  constexpr double kFloor = 1e-250;

  for (std::size_t r = 0; r < n; ++r) a.manifest.run_seeds.push_back(derive_seed(cfg.simulation.seed, r));
  std::vector<double> rel_error(n, 0.0), bound_excess(n, 0.0);
  parallel_for(n, threads, [&](std::size_t r) {
    RandomStream rng(a.manifest.run_seeds[r]);
    const FourierField y0 = sample_stationary(model, rng);
    const double norm0 = sobolev_norm(y0, m);
    FourierField y = y0;
    double worst = 0.0, excess = -std::numeric_limits<double>::infinity();
    for (long long s = 1; s <= steps; ++s) {
      y = y_flow_step(y, dt);
      const double t = s * dt;
      for (std::size_t i = 0; i < model->size(); ++i) {
        const double decay = std::exp(-model->gamma(i) * t);
        for (std::size_t c = 0; c < y.dimension(); ++c) {
          const double exact = decay * std::abs(y0(i, c));
          if (exact < kFloor) continue;
          worst = std::max(worst, std::abs(std::abs(y(i, c)) - exact) / exact);
        }
      }
      excess = std::max(excess, sobolev_norm(y, m) - (std::exp(-gstar * t) * norm0 + 1e-9));
    }
    rel_error[r] = worst;
    bound_excess[r] = excess;
  });

  const double worst = *std::max_element(rel_error.begin(), rel_error.end());
  const double excess = *std::max_element(bound_excess.begin(), bound_excess.end());
  for (std::size_t r = 0; r < n; ++r) {
    w.write("modulus_decay_error", {{"run", r}, {"dt", dt}, {"T", cfg.simulation.horizon}}, rel_error[r], nullptr,
            a.manifest.run_seeds[r]);
  }
  w.write("modulus_decay_error_max", {{"starts", n}, {"dt", dt}, {"T", cfg.simulation.horizon}, {"tolerance", 1e-6}},
          worst, nullptr, cfg.simulation.seed);
  w.write("norm_bound_excess_max", {{"gamma_star", gstar}, {"slack", 1e-9}}, excess, nullptr, cfg.simulation.seed);
  if (!std::isfinite(worst) || !std::isfinite(excess)) throw NumericalError("decay: non-finite error");
  bool ok = true;
  if (worst >= 1e-6) {
    log << "decay: max relative modulus error " << worst << " >= 1e-6\n";
    ok = false;
  }
  if (excess > 0.0) {
    log << "decay: norm bound exceeded by " << excess << "\n";
    ok = false;
  }
  return ok ? exit_code::ok : exit_code::validation;
}

std::vector<TrajectoryRecord> run_ensemble(const ModelPtr& model, const ExperimentConfig& cfg, Artifact& a,
                                           unsigned threads, bool store_fields) {
  const auto n = static_cast<std::size_t>(cfg.simulation.ensemble);
  for (std::size_t r = 0; r < n; ++r) a.manifest.run_seeds.push_back(derive_seed(cfg.simulation.seed, r));
  std::vector<TrajectoryRecord> records(n);
  parallel_for(n, threads, [&](std::size_t r) {
    LagrangianOptions o;
    o.horizon = cfg.simulation.horizon;
    o.dt = cfg.simulation.dt;
    o.record_every = cfg.simulation.record_every;
    o.seed = a.manifest.run_seeds[r];
    o.store_fields = store_fields;
    records[r] = run_lagrangian(model, o);
  });
  return records;
}

void write_drift(ProbeWriter& w, const DriftEstimate& drift, const ExperimentConfig& cfg) {
  for (std::size_t c = 0; c < drift.mean.size(); ++c) {
    w.write("stokes_drift", {{"component", c + 1}, {"T", cfg.simulation.horizon}, {"ensemble", cfg.simulation.ensemble}},
            drift.mean[c], number_or_null(drift.std_error[c]), cfg.simulation.seed);
  }
}

int run_tracer(const ExperimentConfig& cfg, Artifact& a, const std::string& out, unsigned threads) {
  const auto model = make_model(cfg);
  const auto records = run_ensemble(model, cfg, a, threads, false);
  const DriftEstimate drift = stokes_drift_estimate(records);

  if (cfg.output.format == OutputFormat::csv) {
    write_trajectory_csv(a.body, records);
    Artifact side = start_artifact(Command::tracer, cfg);
    side.manifest.run_seeds = a.manifest.run_seeds;
    side.manifest.started = a.manifest.started;
    ProbeWriter w(side.body, side.manifest.config_hash);
    write_drift(w, drift, cfg);
    write_artifact(out + ".drift.jsonl", side, false);
  } else {
    ProbeWriter w(a.body, a.manifest.config_hash);
    write_drift(w, drift, cfg);
  }
  return exit_code::ok;
}

int run_ergodic(const ExperimentConfig& cfg, Artifact& a, unsigned threads) {
  const auto model = make_model(cfg);
  ProbeWriter w(a.body, a.manifest.config_hash);
  const auto& sim = cfg.simulation;
  const auto& p = cfg.probe;
  const ObservableSpec psi = make_observable(cfg);

  // Time averages and occupation of the delta-ball around the attractor.
  const auto records = run_ensemble(model, cfg, a, threads, false);
  std::vector<double> averages, fractions, window_mins;
  for (const auto& rec : records) {
    averages.push_back(time_average(rec, psi));
    const auto occ = occupation_fraction(rec, std::nullopt, p.delta);
    fractions.push_back(occ.fraction);
    window_mins.push_back(occ.window_min);
  }
  w.write("time_average", {{"observable", psi.name()}, {"T", sim.horizon}, {"ensemble", sim.ensemble}}, mean(averages),
          number_or_null(records.size() > 1 ? standard_error(averages) : kNaN), sim.seed);
  w.write("occupation", {{"delta", p.delta}, {"T", sim.horizon}, {"window_min", *std::min_element(window_mins.begin(), window_mins.end())}},
          mean(fractions), number_or_null(records.size() > 1 ? standard_error(fractions) : kNaN), sim.seed);

  MomentScanOptions mo;
  mo.radius = p.R;
  mo.power = p.n;
  mo.horizon = sim.horizon;
  mo.ensemble = sim.ensemble;
  mo.seed = probe_seed(sim.seed, 1);
  mo.threads = threads;
  const auto scan = moment_scan(model, mo);
  w.write("moment_time_max", {{"R", p.R}, {"n", p.n}, {"T", sim.horizon}}, scan.time_max, nullptr, mo.seed);
  w.write("moment_settled", {{"R", p.R}, {"n", p.n}, {"stationary", scan.stationary}}, scan.settled, nullptr, mo.seed);

  const FourierField start = p.R * random_unit_direction(model, probe_seed(sim.seed, 2));
  StabilityOptions so;
  so.horizon = sim.horizon;
  so.dt = sim.dt;
  so.ensemble = sim.ensemble;
  so.seed = probe_seed(sim.seed, 3);
  so.threads = threads;
  const auto stab = stability_probe(model, start, p.eps, so);
  w.write("stochastic_stability", {{"eps", p.eps}, {"R", p.R}, {"T", sim.horizon}}, stab.estimate,
          number_or_null(stab.std_error), so.seed);

  EPropertyOptions eo;
  eo.horizon = sim.horizon;
  eo.dt = sim.dt;
  eo.ensemble = sim.ensemble;
  eo.record_every = sim.record_every;
  eo.seed = probe_seed(sim.seed, 4);
  eo.threads = threads;
  const auto ep = e_property_probe(model, start, p.offsets, psi, eo);
  for (std::size_t i = 0; i < ep.offsets.size(); ++i) {
    w.write("e_property", {{"offset", ep.offsets[i]}, {"observable", psi.name()}, {"argmax_time", ep.argmax_time[i]}},
            ep.D[i], number_or_null(ep.sigma[i]), eo.seed);
  }

  std::vector<double> horizons = p.horizons;
  if (horizons.empty()) horizons = {sim.horizon / 4.0, sim.horizon};
  LlnOptions lo;
  lo.dt = sim.dt;
  lo.ensemble = sim.ensemble;
  lo.record_every = sim.record_every;
  lo.seed = probe_seed(sim.seed, 5);
  lo.threads = threads;
  const auto lln = lln_test(model, psi, horizons, lo);
  for (std::size_t i = 0; i < lln.horizons.size(); ++i) {
    w.write("lln_variance", {{"T", lln.horizons[i]}, {"observable", psi.name()}, {"mean", lln.means[i]}},
            lln.variances[i], nullptr, lo.seed);
  }
  for (std::size_t i = 0; i < lln.ratios.size(); ++i) {
    w.write("lln_ratio", {{"T_from", lln.horizons[i]}, {"T_to", lln.horizons[i + 1]}}, number_or_null(lln.ratios[i]),
            nullptr, lo.seed);
  }
  return exit_code::ok;
}

int run_chain(const ExperimentConfig& cfg, Artifact& a, std::ostream& log) {
  const chain::Observable f = [](double x) { return std::tanh(x); };
  const auto& c = cfg.chain;
  bool ok = true;
  double gap_mass = 0.0;
  a.body << "x,n,closed,exact,mc,mc_stderr,H_n\n";
  for (std::size_t xi = 0; xi < c.x.size(); ++xi) {
    const double x = c.x[xi];
    const std::uint64_t seed = derive_seed(cfg.simulation.seed, xi);
    a.manifest.run_seeds.push_back(seed);
    const auto mc = chain::simulate(x, c.n_max, f, c.paths, seed);
    chain::ChainDistribution dist{{{x, 1.0}}};
    std::vector<double> H;
    if (x >= 1.0) {
      const auto lw = chain::h_g_values(x, c.n_max);
      H = lw.H;
      for (int n = 0; n <= c.n_max; ++n) {
        double total = lw.H[static_cast<std::size_t>(n)];
        for (int k = 0; k < n; ++k) total += lw.G[static_cast<std::size_t>(k)];
        if (std::abs(total - 1.0) > 1e-12) {
          log << "chain: telescoping identity off by " << total - 1.0 << " at x=" << x << " n=" << n << "\n";
          ok = false;
        }
      }
    }
    for (int n = 1; n <= c.n_max; ++n) {
      dist = chain::propagate(dist);
      gap_mass = std::max(gap_mass, dist.mass_where(chain::in_gap));
      const double exact = dist.expect(f);
      double closed = kNaN, hn = kNaN;
      if (x >= 1.0) {
        closed = chain::pn_closed(x, n, f);
        hn = H[static_cast<std::size_t>(n)];
        if (x + n - 1 < 5.0 && std::abs(closed - exact) > 1e-14) {
          log << "chain: closed form differs from exact tree by " << closed - exact << " at x=" << x << " n=" << n
              << "\n";
          ok = false;
        }
      }
      auto cell = [&](double v) {
        if (std::isfinite(v)) a.body << v;
        else a.body << "nan";
      };
      a.body.precision(17);
      a.body << x << ',' << n << ',';
      cell(closed);
      a.body << ',';
      cell(exact);
      a.body << ',' << mc.mean[static_cast<std::size_t>(n)] << ',' << mc.stderr_of_mean[static_cast<std::size_t>(n)]
             << ',';
      cell(hn);
      a.body << '\n';
    }
  }
  a.notes.push_back("f = tanh; states in (-1,1) follow the deterministic map T (kernel extension)");
  std::ostringstream gap;
  gap.precision(17);
  gap << "gap_visit_mass_max " << gap_mass;
  a.notes.push_back(gap.str());
  a.notes.push_back("closed and exact may differ once x+n-1 >= 5 (T-orbit re-entry into [1,inf))");
  return ok ? exit_code::ok : exit_code::validation;
}

}  // namespace

std::optional<Command> command_from_string(std::string_view name) {
  for (Command c : {Command::validate, Command::field, Command::decay, Command::tracer, Command::ergodic,
                    Command::chain}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::validate: return "validate";
    case Command::field: return "field";
    case Command::decay: return "decay";
    case Command::tracer: return "tracer";
    case Command::ergodic: return "ergodic";
    case Command::chain: return "chain";
  }
  return "unknown";
}

std::string version_string() { return TRACERFLOW_VERSION; }

int run_command(Command cmd, const ExperimentConfig& cfg, const RunOptions& options, std::ostream& log) {
  const std::string out = options.out.empty() ? cfg.output.path : options.out;
  const unsigned threads = std::max(1u, options.threads);
  try {
    Artifact a = start_artifact(cmd, cfg);
    if (cmd != Command::chain) a.notes.push_back(kSpectrumNote);
    int code = exit_code::ok;
    bool csv = false;
    switch (cmd) {
      case Command::validate: code = run_validate(cfg, a, log); break;
      case Command::field: code = run_field(cfg, a, threads); break;
      case Command::decay: code = run_decay(cfg, a, log, threads); break;
      case Command::tracer:
        code = run_tracer(cfg, a, out, threads);
        csv = cfg.output.format == OutputFormat::csv;
        break;
      case Command::ergodic: code = run_ergodic(cfg, a, threads); break;
      case Command::chain:
        code = run_chain(cfg, a, log);
        csv = true;
        break;
    }
    write_artifact(out, a, csv);
    return code;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return exit_code::config;
  } catch (const NumericalError& e) {
    log << "numerical failure: " << e.what() << "\n";
    return exit_code::numerical;
  } catch (const std::invalid_argument& e) {
    log << "invalid parameters: " << e.what() << "\n";
    return exit_code::config;
  } catch (const std::exception& e) {
    log << "failure: " << e.what() << "\n";
    return exit_code::numerical;
  }
}

std::string strip_manifest(std::string_view text) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    const bool manifest = (!line.empty() && line.front() == '#') ||
                          line.find("\"probe\":\"manifest\"") != std::string_view::npos;
    if (!manifest) {
      out.append(line);
      out.push_back('\n');
    }
    pos = end + 1;
  }
  return out;
}

}  // namespace tracerflow
