#include "tracerflow/tracer.hpp"

#include "tracerflow/errors.hpp"
#include "tracerflow/stats.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace tracerflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void velocity_at(const FourierField& v, std::span<const double> x, std::span<double> out) {
  thread_local std::vector<double> wrapped;
  wrapped.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) wrapped[j] = wrap_angle(x[j]);
  evaluate_into(v, wrapped, out);
}

}  // namespace

double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

FourierField shift_field(const FourierField& f, std::span<const double> a) {
  const SpectrumModel& model = f.model();
  std::vector<Complex> waves(model.size());
  plane_waves(model, a, waves);
  FourierField out = f;
  for (std::size_t i = 0; i < model.size(); ++i) {
    for (Complex& c : out.mode(i)) c *= waves[i];
  }
  return out;
}

TracerState make_tracer(std::size_t dimension, std::span<const double> x0) {
  TracerState s;
  s.displacement.assign(dimension, 0.0);
  if (!x0.empty()) {
    if (x0.size() != dimension) throw std::invalid_argument("make_tracer: x0 dimension mismatch");
    s.displacement.assign(x0.begin(), x0.end());
  }
  s.position.resize(dimension);
  for (std::size_t j = 0; j < dimension; ++j) s.position[j] = wrap_angle(s.displacement[j]);
  return s;
}

std::pair<TracerState, OUState> advect_step(const TracerState& tracer, const OUState& ou, double dt,
                                            RandomStream& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("advect_step: dt must be positive");
  if (std::abs(tracer.time - ou.time) > 1e-9 * std::max(1.0, std::abs(ou.time))) {
    throw std::invalid_argument("advect_step: tracer and field clocks differ");
  }
  const std::size_t d = tracer.position.size();
  const OUState mid = ou_exact_step(ou, 0.5 * dt, rng);
  OUState end = ou_exact_step(mid, 0.5 * dt, rng);

  std::vector<double> k1(d), k2(d), k3(d), k4(d), probe(d);
  const auto& x = tracer.position;
  velocity_at(ou.field, x, k1);
  for (std::size_t j = 0; j < d; ++j) probe[j] = x[j] + 0.5 * dt * k1[j];
  velocity_at(mid.field, probe, k2);
  for (std::size_t j = 0; j < d; ++j) probe[j] = x[j] + 0.5 * dt * k2[j];
  velocity_at(mid.field, probe, k3);
  for (std::size_t j = 0; j < d; ++j) probe[j] = x[j] + dt * k3[j];
  velocity_at(end.field, probe, k4);

  TracerState next = tracer;
  for (std::size_t j = 0; j < d; ++j) {
    const double step = dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    if (!std::isfinite(step)) throw NumericalError("advect_step: non-finite tracer velocity");
    next.displacement[j] += step;
    next.position[j] = wrap_angle(next.position[j] + step);
  }
  next.time = tracer.time + dt;
  end.time = next.time;
  return {std::move(next), std::move(end)};
}

TrajectoryRecord run_lagrangian(const ModelPtr& model, const LagrangianOptions& options) {
  if (!(options.horizon > 0.0)) throw std::invalid_argument("run_lagrangian: T must be positive");
  if (!(options.dt > 0.0) || options.dt > options.horizon * (1.0 + 1e-12)) {
    throw std::invalid_argument("run_lagrangian: need 0 < dt <= T");
  }
  if (options.record_every < 1) throw std::invalid_argument("run_lagrangian: record_every must be >= 1");

  const auto d = static_cast<std::size_t>(model->dimension());
  const auto steps = static_cast<long long>(std::llround(options.horizon / options.dt));
  RandomStream rng(options.seed);
  OUState ou{sample_stationary(model, rng), 0.0};
  TracerState tracer = make_tracer(d, options.x0);

  TrajectoryRecord rec;
  rec.dimension = d;
  rec.seed = options.seed;
  const std::size_t expected = static_cast<std::size_t>(steps / options.record_every + 2);
  rec.times.reserve(expected);
  std::vector<double> v(d);
  auto record = [&] {
    velocity_at(ou.field, tracer.position, v);
    rec.times.push_back(tracer.time);
    rec.positions.insert(rec.positions.end(), tracer.position.begin(), tracer.position.end());
    rec.displacements.insert(rec.displacements.end(), tracer.displacement.begin(), tracer.displacement.end());
    rec.velocities.insert(rec.velocities.end(), v.begin(), v.end());
    // The shift is a per-mode phase, so the norm needs no shifted copy.
    rec.field_norms.push_back(sobolev_norm(ou.field, model->m()));
    if (options.store_fields) rec.fields.push_back(shift_field(ou.field, tracer.position));
  };

  record();
  for (long long n = 1; n <= steps; ++n) {
    auto [next_tracer, next_ou] = advect_step(tracer, ou, options.dt, rng);
    // Clock from the step count avoids drift of the summed dt.
    next_tracer.time = static_cast<double>(n) * options.dt;
    next_ou.time = next_tracer.time;
    tracer = std::move(next_tracer);
    ou = std::move(next_ou);
    if (n % options.record_every == 0 || n == steps) record();
  }
  return rec;
}

DriftEstimate stokes_drift_estimate(std::span<const TrajectoryRecord> records) {
  if (records.size() < 2) throw std::invalid_argument("stokes_drift_estimate: need at least two records");
  const std::size_t d = records.front().dimension;
  const double horizon = records.front().times.back() - records.front().times.front();
  if (!(horizon > 0.0)) throw std::invalid_argument("stokes_drift_estimate: zero-length record");
  std::vector<std::vector<double>> per_component(d);
  for (const auto& rec : records) {
    const double h = rec.times.back() - rec.times.front();
    if (rec.dimension != d || std::abs(h - horizon) > 1e-9 * horizon) {
      throw std::invalid_argument("stokes_drift_estimate: mismatched horizons");
    }
    const auto start = rec.displacement(0);
    const auto end = rec.displacement(rec.size() - 1);
    for (std::size_t j = 0; j < d; ++j) per_component[j].push_back((end[j] - start[j]) / h);
  }
  DriftEstimate est;
  for (const auto& xs : per_component) {
    est.mean.push_back(mean(xs));
    est.std_error.push_back(standard_error(xs));
  }
  return est;
}

std::vector<double> integrate_velocity(const TrajectoryRecord& record) {
  std::vector<double> total(record.dimension, 0.0);
  for (std::size_t n = 1; n < record.size(); ++n) {
    const double h = record.times[n] - record.times[n - 1];
    const auto a = record.velocity(n - 1);
    const auto b = record.velocity(n);
    for (std::size_t j = 0; j < record.dimension; ++j) total[j] += 0.5 * h * (a[j] + b[j]);
  }
  return total;
}

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRecord> records) {
  const std::size_t d = records.empty() ? 0 : records.front().dimension;
  out << "run_id,t";
  for (std::size_t j = 1; j <= d; ++j) out << ",x" << j;
  for (std::size_t j = 1; j <= d; ++j) out << ",disp" << j;
  for (std::size_t j = 1; j <= d; ++j) out << ",v" << j;
  out << ",norm\n";
  const auto old_precision = out.precision(17);
  for (std::size_t run = 0; run < records.size(); ++run) {
    const auto& rec = records[run];
    for (std::size_t n = 0; n < rec.size(); ++n) {
      out << run << ',' << rec.times[n];
      for (double x : rec.position(n)) out << ',' << x;
      for (double x : rec.displacement(n)) out << ',' << x;
      for (double x : rec.velocity(n)) out << ',' << x;
      out << ',' << rec.field_norms[n] << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace tracerflow
