#include "tracerflow/ergodic.hpp"

#include "tracerflow/parallel.hpp"
#include "tracerflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tracerflow {

namespace {

double norm_m(const FourierField& z) { return sobolev_norm(z, z.model().m()); }

bool is_zero_field(const FourierField& f) {
  return std::all_of(f.coefficients().begin(), f.coefficients().end(),
                     [](const Complex& c) { return c == Complex(0.0, 0.0); });
}

// Integer steps covering `horizon` at `dt`, rejecting non-multiples.
long long step_count(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("horizon and dt must be positive");
  return std::max(1LL, static_cast<long long>(std::llround(horizon / dt)));
}

}  // namespace

ObservableSpec ObservableSpec::tanh_norm() { return {}; }

ObservableSpec ObservableSpec::velocity(std::size_t component) {
  ObservableSpec s;
  s.kind = ObservableKind::velocity_at_origin;
  s.component = component;
  return s;
}

ObservableSpec ObservableSpec::indicator(std::optional<FourierField> center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("indicator observable needs radius > 0");
  ObservableSpec s;
  s.kind = ObservableKind::indicator_ball;
  s.center = std::move(center);
  s.radius = radius;
  return s;
}

double ObservableSpec::operator()(const FourierField& z) const {
  switch (kind) {
    case ObservableKind::bounded_lipschitz_of_norm: {
      const double r = norm_m(z);
      return std::tanh(r * r);
    }
    case ObservableKind::velocity_at_origin: {
      if (component >= z.dimension()) throw std::out_of_range("velocity observable: component out of range");
      return value_at_origin(z)[component];
    }
    case ObservableKind::indicator_ball: {
      const double dist = center ? norm_m(z - *center) : norm_m(z);
      return dist < radius ? 1.0 : 0.0;
    }
  }
  return 0.0;
}

double ObservableSpec::at(const TrajectoryRecord& record, std::size_t n) const {
  switch (kind) {
    case ObservableKind::bounded_lipschitz_of_norm: {
      const double r = record.field_norms.at(n);
      return std::tanh(r * r);
    }
    case ObservableKind::velocity_at_origin: {
      if (component >= record.dimension) throw std::out_of_range("velocity observable: component out of range");
      return record.velocity(n)[component];
    }
    case ObservableKind::indicator_ball: {
      if (!center || is_zero_field(*center)) return record.field_norms.at(n) < radius ? 1.0 : 0.0;
      if (record.fields.size() != record.size()) {
        throw std::invalid_argument("indicator with nonzero center needs stored fields");
      }
      return (*this)(record.fields[n]);
    }
  }
  return 0.0;
}

std::string ObservableSpec::name() const {
  switch (kind) {
    case ObservableKind::bounded_lipschitz_of_norm: return "tanh_norm";
    case ObservableKind::velocity_at_origin: return "velocity_" + std::to_string(component + 1);
    case ObservableKind::indicator_ball: return "indicator_ball";
  }
  return "unknown";
}

double tanh_square_lipschitz() {
  // d/dr tanh(r^2) = 2 r sech^2(r^2), unimodal with its peak below r = 2.
  double best = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double r = 2.0 * i / 200000.0;
    const double c = std::cosh(r * r);
    best = std::max(best, 2.0 * r / (c * c));
  }
  return best;
}

double time_average_until(const TrajectoryRecord& record, const ObservableSpec& psi, double horizon) {
  if (record.size() == 0) throw std::invalid_argument("time_average: empty record");
  const std::size_t last = record_index_at(record, horizon);
  if (last == 0) return psi.at(record, 0);
  double integral = 0.0;
  double prev = psi.at(record, 0);
  for (std::size_t n = 1; n <= last; ++n) {
    const double cur = psi.at(record, n);
    integral += 0.5 * (record.times[n] - record.times[n - 1]) * (prev + cur);
    prev = cur;
  }
  return integral / (record.times[last] - record.times[0]);
}

double time_average(const TrajectoryRecord& record, const ObservableSpec& psi) {
  if (record.size() == 0) throw std::invalid_argument("time_average: empty record");
  return time_average_until(record, psi, record.times.back());
}

std::size_t record_index_at(const TrajectoryRecord& record, double t) {
  const auto it = std::lower_bound(record.times.begin(), record.times.end(), t * (1.0 - 1e-9));
  if (it == record.times.end() || std::abs(*it - t) > 1e-9 * std::max(1.0, std::abs(t))) {
    throw std::invalid_argument("time " + std::to_string(t) + " is not a recorded time");
  }
  return static_cast<std::size_t>(it - record.times.begin());
}

OccupationReport occupation_fraction(const TrajectoryRecord& record, const std::optional<FourierField>& z,
                                     double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("occupation_fraction: delta must be positive");
  if (record.size() == 0) throw std::invalid_argument("occupation_fraction: empty record");
  if (z && !record.fields.empty() && !record.fields.front().shares_model(*z)) {
    throw std::invalid_argument("occupation_fraction: model mismatch");
  }
  const ObservableSpec inside = ObservableSpec::indicator(z, delta);
  std::vector<double> hits(record.size());
  for (std::size_t n = 0; n < record.size(); ++n) hits[n] = inside.at(record, n);

  OccupationReport report;
  report.fraction = mean(hits);
  // Sliding windows of a quarter of the record, all inside its second half.
  const std::size_t begin = record.size() / 2;
  const std::size_t width = std::max<std::size_t>(1, (record.size() - begin) / 2);
  double window = 0.0;
  for (std::size_t n = begin; n < begin + width; ++n) window += hits[n];
  double lowest = window;
  for (std::size_t n = begin + width; n < hits.size(); ++n) {
    window += hits[n] - hits[n - width];
    lowest = std::min(lowest, window);
  }
  report.window_min = lowest / static_cast<double>(width);
  return report;
}

double stationary_moment(const SpectrumModel& model, int power) {
  if (power < 1) throw std::invalid_argument("stationary_moment: power must be >= 1");
  // ||V||^2 = sum_i mu_i E_i with E_i ~ Exp(1) independent.
  std::vector<double> mu;
  for (std::size_t i : model.representatives()) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(model.mode(i).energy, Eigen::EigenvaluesOnly);
    const double weight = 2.0 * std::pow(model.wavenumber(i), 2.0 * model.m());
    for (Eigen::Index r = 0; r < eig.eigenvalues().size(); ++r) {
      const double lambda = eig.eigenvalues()(r);
      if (lambda > 0.0) mu.push_back(weight * lambda);
    }
  }
  std::vector<double> kappa(static_cast<std::size_t>(power) + 1, 0.0);
  double factorial = 1.0;  // (r-1)!
  for (int r = 1; r <= power; ++r) {
    if (r > 1) factorial *= (r - 1);
    double s = 0.0;
    for (double m : mu) s += std::pow(m, r);
    kappa[static_cast<std::size_t>(r)] = factorial * s;
  }
  std::vector<double> moment(static_cast<std::size_t>(power) + 1, 0.0);
  moment[0] = 1.0;
  for (int n = 1; n <= power; ++n) {
    double binom = 1.0;  // C(n-1, j)
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      s += binom * kappa[static_cast<std::size_t>(j) + 1] * moment[static_cast<std::size_t>(n - 1 - j)];
      binom = binom * (n - 1 - j) / (j + 1);
    }
    moment[static_cast<std::size_t>(n)] = s;
  }
  return moment[static_cast<std::size_t>(power)];
}

FourierField random_unit_direction(const ModelPtr& model, std::uint64_t seed) {
  RandomStream rng(seed);
  FourierField v = sample_stationary(model, rng);
  double norm = norm_m(v);
  if (norm == 0.0) {
    // Zero-energy model: fall back to the first representative mode.
    if (model->representatives().empty()) throw std::invalid_argument("model has no modes");
    v(model->representatives().front(), 0) = 1.0;
    v.mirror_conjugates();
    norm = norm_m(v);
  }
  v *= 1.0 / norm;
  return v;
}

MomentScanReport moment_scan(const ModelPtr& model, const MomentScanOptions& options) {
  if (options.power < 1) throw std::invalid_argument("moment_scan: n must be >= 1");
  if (options.ensemble < 2) throw std::invalid_argument("moment_scan: ensemble must be >= 2");
  if (options.grid_points < 1) throw std::invalid_argument("moment_scan: grid_points must be >= 1");
  if (!(options.horizon > 0.0)) throw std::invalid_argument("moment_scan: T must be positive");

  const auto points = static_cast<std::size_t>(options.grid_points);
  const double dt = options.horizon / options.grid_points;
  FourierField start(model);
  if (options.start == MomentStart::radius && options.radius > 0.0) {
    start = random_unit_direction(model, derive_seed(options.seed, 0xD1EC7104ULL));
    start *= options.radius;
  }

  const auto members = static_cast<std::size_t>(options.ensemble);
  std::vector<std::vector<double>> samples(members);
  parallel_for(members, options.threads, [&](std::size_t e) {
    RandomStream rng(derive_seed(options.seed, e));
    OUState state{options.start == MomentStart::stationary ? sample_stationary(model, rng) : start, 0.0};
    auto& out = samples[e];
    out.reserve(points + 1);
    out.push_back(std::pow(norm_m(state.field), 2.0 * options.power));
    for (std::size_t p = 0; p < points; ++p) {
      state = ou_exact_step(state, dt, rng);
      out.push_back(std::pow(norm_m(state.field), 2.0 * options.power));
    }
  });

  MomentScanReport report;
  std::vector<double> column(members);
  for (std::size_t p = 0; p <= points; ++p) {
    for (std::size_t e = 0; e < members; ++e) column[e] = samples[e][p];
    report.times.push_back(static_cast<double>(p) * dt);
    report.moments.push_back(mean(column));
    report.std_errors.push_back(standard_error(column));
  }
  report.time_max = *std::max_element(report.moments.begin(), report.moments.end());
  const std::size_t tail_start = points + 1 - std::max<std::size_t>(1, (points + 1) / 4);
  report.settled = mean(std::span<const double>(report.moments).subspan(tail_start));
  report.stationary = stationary_moment(*model, options.power);
  return report;
}

ProbabilityEstimate stability_probe(const ModelPtr& model, const FourierField& x, double eps,
                                    const StabilityOptions& options) {
  if (x.model_ptr() != model) throw std::invalid_argument("stability_probe: start belongs to another model");
  if (!(eps > 0.0)) throw std::invalid_argument("stability_probe: eps must be positive");
  if (options.ensemble < 1) throw std::invalid_argument("stability_probe: ensemble must be >= 1");
  const long long steps = step_count(options.horizon, options.dt);

  // Noiseless reference with the same splitting, so Z and Y differ only by the noise.
  const FourierField no_noise(model);
  FourierField y = x;
  for (long long n = 0; n < steps; ++n) y = z_galerkin_step(y, options.dt, no_noise);

  const auto members = static_cast<std::size_t>(options.ensemble);
  std::vector<double> inside(members);
  parallel_for(members, options.threads, [&](std::size_t e) {
    RandomStream rng(derive_seed(options.seed, e));
    FourierField z = x;
    for (long long n = 0; n < steps; ++n) z = z_galerkin_step(z, options.dt, rng);
    inside[e] = norm_m(z - y) < eps ? 1.0 : 0.0;
  });
  return {mean(inside), standard_error(inside)};
}

EPropertyReport e_property_probe(const ModelPtr& model, const FourierField& x, const std::vector<double>& offsets,
                                 const ObservableSpec& psi, const EPropertyOptions& options) {
  for (std::size_t i = 1; i < offsets.size(); ++i) {
    if (offsets[i] > offsets[i - 1]) throw std::invalid_argument("e_property_probe: offsets must be sorted decreasing");
  }
  for (double h : offsets) {
    if (h < 0.0) throw std::invalid_argument("e_property_probe: offsets must be nonnegative");
  }
  if (options.ensemble < 2) throw std::invalid_argument("e_property_probe: ensemble must be >= 2");
  if (options.record_every < 1) throw std::invalid_argument("e_property_probe: record_every must be >= 1");
  const long long steps = step_count(options.horizon, options.dt);
  const FourierField direction =
      options.direction ? *options.direction : random_unit_direction(model, derive_seed(options.seed, 0xE9A0ULL));

  std::vector<long long> record_steps;
  for (long long n = 0; n <= steps; n += options.record_every) record_steps.push_back(n);
  if (record_steps.back() != steps) record_steps.push_back(steps);
  const std::size_t n_times = record_steps.size();
  const std::size_t n_off = offsets.size();

  // diffs[e][o * n_times + t] = psi(Z^x(t)) - psi(Z^{x + h_o v}(t)).
  const auto members = static_cast<std::size_t>(options.ensemble);
  std::vector<std::vector<double>> diffs(members);
  parallel_for(members, options.threads, [&](std::size_t e) {
    RandomStream rng(derive_seed(options.seed, e));
    FourierField base = x;
    std::vector<FourierField> shifted;
    shifted.reserve(n_off);
    for (double h : offsets) shifted.push_back(x + h * direction);
    auto& out = diffs[e];
    out.assign(n_off * n_times, 0.0);
    std::size_t next_record = 0;
    for (long long n = 0; n <= steps; ++n) {
      if (n > 0) {
        const FourierField noise = ou_noise(model, options.dt, rng);
        base = z_galerkin_step(base, options.dt, noise);
        for (auto& s : shifted) s = z_galerkin_step(s, options.dt, noise);
      }
      if (next_record < n_times && record_steps[next_record] == n) {
        const double pb = psi(base);
        for (std::size_t o = 0; o < n_off; ++o) out[o * n_times + next_record] = pb - psi(shifted[o]);
        ++next_record;
      }
    }
  });

  EPropertyReport report;
  report.offsets = offsets;
  std::vector<double> column(members);
  for (std::size_t o = 0; o < n_off; ++o) {
    double best = -1.0, best_sigma = 0.0, best_time = 0.0;
    for (std::size_t t = 0; t < n_times; ++t) {
      for (std::size_t e = 0; e < members; ++e) column[e] = diffs[e][o * n_times + t];
      const double gap = std::abs(mean(column));
      if (gap > best) {
        best = gap;
        best_sigma = standard_error(column);
        best_time = static_cast<double>(record_steps[t]) * options.dt;
      }
    }
    report.D.push_back(best);
    report.sigma.push_back(best_sigma);
    report.argmax_time.push_back(best_time);
  }
  return report;
}

LlnReport lln_test(const ModelPtr& model, const ObservableSpec& psi, const std::vector<double>& horizons,
                   const LlnOptions& options) {
  if (horizons.size() < 2) throw std::invalid_argument("lln_test: need at least two horizons");
  if (!std::is_sorted(horizons.begin(), horizons.end())) throw std::invalid_argument("lln_test: horizons must increase");
  if (options.ensemble < 2) throw std::invalid_argument("lln_test: ensemble must be >= 2");
  const auto members = static_cast<std::size_t>(options.ensemble);
  std::vector<std::vector<double>> averages(members);
  parallel_for(members, options.threads, [&](std::size_t e) {
    LagrangianOptions run;
    run.horizon = horizons.back();
    run.dt = options.dt;
    run.record_every = options.record_every;
    run.seed = derive_seed(options.seed, e);
    const TrajectoryRecord rec = run_lagrangian(model, run);
    for (double h : horizons) averages[e].push_back(time_average_until(rec, psi, h));
  });

  LlnReport report;
  report.horizons = horizons;
  std::vector<double> column(members);
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    for (std::size_t e = 0; e < members; ++e) column[e] = averages[e][h];
    report.means.push_back(mean(column));
    report.variances.push_back(sample_variance(column));
  }
  for (std::size_t h = 1; h < horizons.size(); ++h) {
    const double prev = report.variances[h - 1];
    report.ratios.push_back(prev > 0.0 ? report.variances[h] / prev : 0.0);
  }
  return report;
}

}  // namespace tracerflow
