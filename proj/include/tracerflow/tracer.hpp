#pragma once

#include "tracerflow/field.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace tracerflow {

struct TracerState {
  std::vector<double> position;      // on the torus, each component in [0, 2 pi)
  std::vector<double> displacement;  // unwrapped
  double time = 0.0;
};

/// Time series of one Lagrangian run. Row n of each d-vector series is stored
/// contiguously at [n*d, (n+1)*d).
struct TrajectoryRecord {
  std::size_t dimension = 0;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<double> positions;
  std::vector<double> displacements;
  std::vector<double> velocities;   // Z(t, 0) = V(t, x(t))
  std::vector<double> field_norms;  // ||Z(t)||_{X^m}
  std::vector<FourierField> fields; // Z(t), only when requested

  std::size_t size() const { return times.size(); }
  std::span<const double> position(std::size_t n) const { return row(positions, n); }
  std::span<const double> displacement(std::size_t n) const { return row(displacements, n); }
  std::span<const double> velocity(std::size_t n) const { return row(velocities, n); }

 private:
  std::span<const double> row(const std::vector<double>& v, std::size_t n) const {
    return {v.data() + n * dimension, dimension};
  }
};

/// Fourier shift: coeff(k) -> exp(i k.a) coeff(k), i.e. x -> f(x + a).
FourierField shift_field(const FourierField& f, std::span<const double> a);

/// Wraps each component into [0, 2 pi).
double wrap_angle(double x);

TracerState make_tracer(std::size_t dimension, std::span<const double> x0 = {});

/// Advances the field by two exact OU half-steps and the tracer by one RK4
/// step using the snapshots at t, t + dt/2 and t + dt.
std::pair<TracerState, OUState> advect_step(const TracerState& tracer, const OUState& ou, double dt,
                                            RandomStream& rng);

struct LagrangianOptions {
  double horizon = 10.0;
  double dt = 1e-3;
  int record_every = 1;
  std::uint64_t seed = 0;
  std::vector<double> x0;   // empty means the origin
  bool store_fields = false;
};

/// Stationary-start Lagrangian run. Records times 0, record_every*dt, ... and
/// always the final step.
TrajectoryRecord run_lagrangian(const ModelPtr& model, const LagrangianOptions& options);

struct DriftEstimate {
  std::vector<double> mean;
  std::vector<double> std_error;
};

/// Ensemble mean and standard error of displacement(T) / T.
DriftEstimate stokes_drift_estimate(std::span<const TrajectoryRecord> records);

/// Trapezoid integral of the recorded Lagrangian velocity over the record.
std::vector<double> integrate_velocity(const TrajectoryRecord& record);

/// CSV with columns run_id,t,x1..xd,disp1..dispd,v1..vd,norm.
void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRecord> records);

}  // namespace tracerflow
