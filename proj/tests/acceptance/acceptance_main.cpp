// Acceptance run: one PASS/FAIL line per criterion, with wall time.

#include "tracerflow/chain.hpp"
#include "tracerflow/ergodic.hpp"
#include "tracerflow/field.hpp"
#include "tracerflow/spectrum.hpp"
#include "tracerflow/stats.hpp"
#include "tracerflow/tracer.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace tracerflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

ModelPtr make_default(Projection p = Projection::full, int K = 8) {
  PowerLawSpectrum s;
  s.projection = p;
  s.truncation = K;
  return std::make_shared<const SpectrumModel>(build_power_law_spectrum(s));
}

constexpr std::uint64_t kSeed = 20240611;

// 1. Per-mode modulus decay of the noiseless flow.
Outcome attractor_decay() {
  const auto model = make_default();
  const double dt = 1e-3;
  const int steps = 5000;
  const double gstar = gamma_star(*model);
  double worst = 0.0, excess = -1e300;
  for (int s = 0; s < 20; ++s) {
    RandomStream rng(derive_seed(kSeed, s));
    const FourierField y0 = sample_stationary(model, rng);
    const double n0 = sobolev_norm(y0, 0.0);
    FourierField y = y0;
    for (int n = 1; n <= steps; ++n) {
      y = y_flow_step(y, dt);
      const double t = n * dt;
      for (std::size_t i = 0; i < model->size(); ++i) {
        const double decay = std::exp(-model->gamma(i) * t);
        for (std::size_t c = 0; c < y.dimension(); ++c) {
          const double exact = decay * std::abs(y0(i, c));
          if (exact < 1e-250) continue;
          worst = std::max(worst, std::abs(std::abs(y(i, c)) - exact) / exact);
        }
      }
      excess = std::max(excess, sobolev_norm(y, 0.0) - (std::exp(-gstar * t) * n0 + 1e-9));
    }
  }
  return {worst < 1e-6 && excess <= 0.0,
          "max relative modulus error " + fmt(worst) + ", norm bound margin " + fmt(-excess)};
}

// 2. Stationary covariance and lag correlations.
Outcome ou_covariance() {
  const auto model = make_default();
  const int samples = 20000;
  const std::vector<double> lags{0.1, 0.5, 1.0};
  const auto reps = model->representatives();
  const std::size_t d = model->dimension();

  std::vector<ComplexMatrix> cov(model->size(), ComplexMatrix::Zero(d, d));
  std::vector<std::size_t> top(reps.begin(), reps.end());
  std::sort(top.begin(), top.end(), [&](std::size_t a, std::size_t b) {
    return model->mode(a).energy.trace().real() > model->mode(b).energy.trace().real();
  });
  top.resize(10);
  std::vector<std::vector<Complex>> cross(lags.size(), std::vector<Complex>(top.size(), 0.0));
  std::vector<double> power(top.size(), 0.0);

  for (int s = 0; s < samples; ++s) {
    RandomStream rng(derive_seed(kSeed + 2, s));
    const FourierField v0 = sample_stationary(model, rng);
    for (std::size_t i = 0; i < model->size(); ++i) {
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) cov[i](a, b) += v0(i, a) * std::conj(v0(i, b));
      }
    }
    for (std::size_t j = 0; j < top.size(); ++j) {
      for (std::size_t c = 0; c < d; ++c) power[j] += std::norm(v0(top[j], c));
    }
    for (std::size_t l = 0; l < lags.size(); ++l) {
      const OUState vh = ou_exact_step({v0, 0.0}, lags[l], rng);
      for (std::size_t j = 0; j < top.size(); ++j) {
        for (std::size_t c = 0; c < d; ++c) cross[l][j] += vh.field(top[j], c) * std::conj(v0(top[j], c));
      }
    }
  }

  double cov_err = 0.0;
  for (std::size_t i = 0; i < model->size(); ++i) {
    const ComplexMatrix& e = model->mode(i).energy;
    cov_err = std::max(cov_err, (cov[i] / static_cast<double>(samples) - e).norm() / e.norm());
  }
  double corr_abs = 0.0, corr_rel = 0.0;
  for (std::size_t l = 0; l < lags.size(); ++l) {
    for (std::size_t j = 0; j < top.size(); ++j) {
      const double rho = cross[l][j].real() / power[j];
      const double exact = std::exp(-model->gamma(top[j]) * lags[l]);
      corr_abs = std::max(corr_abs, std::abs(rho - exact));
      corr_rel = std::max(corr_rel, std::abs(rho - exact) / exact);
    }
  }
  return {cov_err < 0.05 && corr_abs < 0.05,
          "max Frobenius relative covariance error " + fmt(cov_err) + ", max lag correlation error " + fmt(corr_abs) +
              " (max relative " + fmt(corr_rel) + ")"};
}

// 3. Shift construction preserves the norm; Galerkin Z matches the OU law.
Outcome equality_in_law() {
  double pathwise = 0.0;
  {
    const auto model = make_default();
    LagrangianOptions o;
    o.horizon = 1.0;
    o.dt = 1e-3;
    o.record_every = 10;
    o.store_fields = true;
    for (int r = 0; r < 4; ++r) {
      o.seed = derive_seed(kSeed + 3, r);
      const auto rec = run_lagrangian(model, o);
      for (std::size_t n = 0; n < rec.size(); ++n) {
        pathwise = std::max(pathwise, std::abs(sobolev_norm(rec.fields[n], model->m()) - rec.field_norms[n]) /
                                          std::max(rec.field_norms[n], 1e-300));
      }
    }
  }
  const auto model = make_default(Projection::full, 4);
  const int samples = 2000;
  const double dt = 1e-3;
  std::vector<double> z_norms, v_norms;
  for (int s = 0; s < samples; ++s) {
    RandomStream rng(derive_seed(kSeed + 4, s));
    FourierField z = sample_stationary(model, rng);
    for (int n = 0; n < 1000; ++n) z = z_galerkin_step(z, dt, rng);
    z_norms.push_back(sobolev_norm(z, model->m()));
    RandomStream other(derive_seed(kSeed + 5, s));
    const OUState v = ou_exact_step({sample_stationary(model, other), 0.0}, 1.0, other);
    v_norms.push_back(sobolev_norm(v.field, model->m()));
  }
  const auto ks = ks_two_sample(z_norms, v_norms);
  return {pathwise < 1e-12 && ks.p_value > 0.01,
          "pathwise relative norm gap " + fmt(pathwise) + ", KS statistic " + fmt(ks.statistic) + " p=" +
              fmt(ks.p_value)};
}

struct LongRun {
  double identity_ratio;  // |integral - displacement| / bound, max over components
  std::vector<double> x50, x200;
};

// Runs for criteria 4 and 5: incompressible, T=200, dt=0.01, 100 runs.
std::vector<LongRun> long_runs() {
  const auto model = make_default(Projection::incompressible);
  std::vector<LongRun> out;
  for (int r = 0; r < 100; ++r) {
    LagrangianOptions o;
    o.horizon = 200.0;
    o.dt = 0.01;
    o.seed = derive_seed(kSeed + 6, r);
    const auto rec = run_lagrangian(model, o);
    const auto integral = integrate_velocity(rec);
    double vmax = 0.0;
    for (std::size_t n = 0; n < rec.size(); ++n) vmax = std::max(vmax, std::hypot(rec.velocity(n)[0], rec.velocity(n)[1]));
    const double bound = 5.0 * o.dt * o.dt * o.horizon * vmax;
    const auto last = rec.displacement(rec.size() - 1);
    double ratio = 0.0;
    for (std::size_t j = 0; j < 2; ++j) ratio = std::max(ratio, std::abs(integral[j] - last[j]) / bound);
    const auto at50 = rec.displacement(record_index_at(rec, 50.0));
    out.push_back({ratio, {at50.begin(), at50.end()}, {last.begin(), last.end()}});
  }
  return out;
}

Outcome displacement_identity(const std::vector<LongRun>& runs) {
  double worst = 0.0;
  for (const auto& r : runs) worst = std::max(worst, r.identity_ratio);
  return {worst <= 1.0, "worst |integral - displacement| / bound = " + fmt(worst) + " over " +
                            std::to_string(runs.size()) + " runs"};
}

Outcome stokes_drift(const std::vector<LongRun>& runs) {
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<double> s50, s200;
    for (const auto& r : runs) {
      s50.push_back(r.x50[j] / 50.0);
      s200.push_back(r.x200[j] / 200.0);
    }
    const double m = mean(s200), se = standard_error(s200);
    const double ratio = sample_variance(s200) / sample_variance(s50);
    ok = ok && std::abs(m) < 3.0 * se && ratio <= 0.6;
    detail << "x" << j + 1 << ": mean " << fmt(m) << " stderr " << fmt(se) << " variance ratio " << fmt(ratio) << "; ";
  }
  return {ok, detail.str()};
}

// 6. Shared-noise coupling.
Outcome e_property() {
  const auto model = make_default();
  EPropertyOptions o;
  o.horizon = 2.0;
  o.ensemble = 200;
  o.seed = kSeed + 7;
  RandomStream rng(kSeed + 8);
  const FourierField x = sample_stationary(model, rng);
  const auto psi = ObservableSpec::tanh_norm();
  const auto zero = e_property_probe(model, x, {0.0}, psi, o);
  const std::vector<double> offsets{1.0, 0.5, 0.25, 0.125};
  const auto r = e_property_probe(model, x, offsets, psi, o);
  bool ok = zero.D[0] == 0.0;
  std::ostringstream detail;
  detail << "D(0)=" << zero.D[0];
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    detail << " D(" << offsets[i] << ")=" << fmt(r.D[i]) << "+-" << fmt(r.sigma[i]);
    if (i > 0) ok = ok && r.D[i] <= r.D[i - 1] + 3.0 * r.sigma[i - 1];
  }
  return {ok, detail.str()};
}

// 7. Moment scans from radius R.
Outcome moment_bound() {
  const auto model = make_default();
  bool ok = true;
  std::ostringstream detail;
  for (double R : {1.0, 10.0}) {
    for (int n : {1, 2}) {
      MomentScanOptions o;
      o.radius = R;
      o.power = n;
      o.horizon = 20.0;
      o.ensemble = 500;
      o.grid_points = 100;
      o.seed = derive_seed(kSeed + 9, static_cast<std::uint64_t>(R) * 10 + n);
      const auto s = moment_scan(model, o);
      const double rel = std::abs(s.settled - s.stationary) / s.stationary;
      ok = ok && std::isfinite(s.time_max) && rel < 0.2;
      detail << "R=" << R << " n=" << n << ": max " << fmt(s.time_max) << " settled " << fmt(s.settled)
             << " stationary " << fmt(s.stationary) << "; ";
    }
  }
  return {ok, detail.str()};
}

// 8. Counterexample chain.
Outcome counterexample_chain() {
  using namespace tracerflow::chain;
  const Observable f = [](double v) { return std::tanh(v); };
  const std::vector<double> xs{1.0, 1.5, 2.0};
  double telescoping = 0.0, closed = 0.0, ladder = 0.0, mc_z = 0.0;
  for (double x : xs) {
    for (int n = 0; n <= 40; ++n) {
      const auto w = h_g_values(x, n);
      telescoping = std::max(telescoping, std::abs(std::accumulate(w.G.begin(), w.G.end(), w.H.back()) - 1.0));
      if (n >= 1 && x + n - 1 < 5) closed = std::max(closed, std::abs(pn_closed(x, n, f) - pn_exact(x, n, f)));
    }
    ProbeOptions po;
    po.mc_paths = 0;
    const auto probe = chain_probes(x, po, f);
    for (std::size_t n = 0; n < probe.never_jumped.size(); ++n) {
      ladder = std::max(ladder, std::abs(probe.never_jumped[n] - probe.ladder_H[n]));
    }
    const auto mc = simulate(x, 40, f, 100000, derive_seed(kSeed + 10, static_cast<std::uint64_t>(x * 2)));
    for (int n : {5, 10, 20, 40}) {
      const auto k = static_cast<std::size_t>(n);
      mc_z = std::max(mc_z, std::abs(mc.mean[k] - pn_exact(x, n, f)) / mc.stderr_of_mean[k]);
    }
  }
  // Partial-sum oracle: 10^6 terms plus the integral tail 1/(x+N) +- 1/(x+N)^2.
  double partial = 0.0;
  for (int j = 999999; j >= 0; --j) partial += 1.0 / ((2.0 + j) * (2.0 + j));
  const double oracle = std::exp(-(partial + 1.0 / (2.0 + 1e6)));
  const double h_inf_err = std::abs(h_infinity(2.0) - oracle);

  ProbeOptions po;
  po.mc_paths = 0;
  po.ys = {1.6, 1.51, 1.501};
  const auto sup = chain_probes(1.5, po, f).sup_differences;
  const bool monotone = sup[1] <= sup[0] + 1e-12 && sup[2] <= sup[1] + 1e-12;

  const bool ok = telescoping < 1e-12 && closed < 1e-14 && mc_z < 3.0 && ladder < 1e-14 && h_inf_err < 1e-4 &&
                  std::abs(h_infinity(2.0) - 0.52470) < 1e-4 && monotone;
  std::ostringstream detail;
  detail << "telescoping " << fmt(telescoping) << ", closed-exact " << fmt(closed) << ", MC max |z| " << fmt(mc_z)
         << ", ladder " << fmt(ladder) << ", H_inf(2)=" << h_infinity(2.0) << " (oracle gap " << fmt(h_inf_err)
         << "), sup diffs " << fmt(sup[0]) << " " << fmt(sup[1]) << " " << fmt(sup[2]);
  return {ok, detail.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Drops '#' header lines and the manifest record.
std::string body_of(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string out;
  for (std::string line; std::getline(in, line);) {
    if ((!line.empty() && line[0] == '#') || line.find("\"probe\":\"manifest\"") != std::string::npos) continue;
    out += line + "\n";
  }
  return out;
}

// 9. CLI reproducibility across repeats and worker counts.
Outcome reproducibility(const std::string& cli, const fs::path& work) {
  fs::create_directories(work);
  const std::vector<std::pair<std::string, std::string>> cases{
      {"tracer", R"({"K": 4, "seed": 7, "simulation": {"dt": 0.01, "T": 1, "ensemble": 8}})"},
      {"ergodic", R"({"K": 4, "seed": 7, "simulation": {"dt": 0.01, "T": 1, "ensemble": 8},
                      "output": {"format": "jsonl"}})"},
      {"tracer", R"({"K": 4, "seed": 9, "simulation": {"dt": 0.01, "T": 1, "ensemble": 8},
                     "output": {"format": "jsonl"}})"},
  };
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const fs::path config = work / ("case" + std::to_string(c) + ".json");
    std::ofstream(config) << cases[c].second;
    std::vector<fs::path> outs;
    for (const char* threads : {"1", "8", "1"}) {
      const fs::path out = work / ("case" + std::to_string(c) + "_" + std::to_string(outs.size()) + ".out");
      const std::string cmd = "\"" + cli + "\" " + cases[c].first + " --config \"" + config.string() + "\" --out \"" +
                              out.string() + "\" --threads " + threads + " 2>>\"" + (work / "cli.log").string() + "\"";
      if (std::system(cmd.c_str()) != 0) ok = false;
      outs.push_back(out);
    }
    const std::string body = body_of(outs[0]);
    bool same = !body.empty() && body == body_of(outs[1]) && body == body_of(outs[2]);
    if (cases[c].first == "tracer" && fs::exists(outs[0].string() + ".drift.jsonl")) {
      const std::string drift = body_of(outs[0].string() + ".drift.jsonl");
      same = same && drift == body_of(outs[1].string() + ".drift.jsonl");
    }
    ok = ok && same;
    detail << cases[c].first << (same ? " identical" : " DIFFERS") << "; ";
  }
  return {ok, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tracerflow acceptance run"};
  std::string cli, workdir = "acceptance_work";
  app.add_option("--tracerflow", cli, "path to the tracerflow executable")->required();
  app.add_option("--workdir", workdir, "scratch directory");
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  auto report = [&](int id, const std::string& name, double limit, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o = body();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit > 0.0 && secs >= limit) {
      o.pass = false;
      o.detail += " [runtime limit " + fmt(limit) + " s exceeded]";
    }
    failures += !o.pass;
    std::printf("%s criterion %d %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "attractor decay", 10.0, attractor_decay);
  report(2, "OU covariance", 60.0, ou_covariance);
  report(3, "equality in law", 0.0, equality_in_law);
  std::vector<LongRun> runs;
  const auto start = std::chrono::steady_clock::now();
  runs = long_runs();
  const double shared = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(4, "displacement identity", 0.0, [&] { return displacement_identity(runs); });
  report(5, "LLN and Stokes drift", 600.0 - shared, [&] {
    auto o = stokes_drift(runs);
    o.detail += " (shared ensemble " + fmt(shared) + " s)";
    return o;
  });
  report(6, "e-property", 0.0, e_property);
  report(7, "moment bound", 0.0, moment_bound);
  report(8, "counterexample chain", 60.0, counterexample_chain);
  report(9, "reproducibility", 0.0, [&] { return reproducibility(cli, workdir); });

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
