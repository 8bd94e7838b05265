#pragma once

#include "tracerflow/field.hpp"
#include "tracerflow/tracer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tracerflow {

enum class ObservableKind { bounded_lipschitz_of_norm, velocity_at_origin, indicator_ball };

/// Test function psi on the state space X^m.
struct ObservableSpec {
  ObservableKind kind = ObservableKind::bounded_lipschitz_of_norm;
  std::size_t component = 0;          // velocity_at_origin
  std::optional<FourierField> center; // indicator_ball; nullopt is the zero field
  double radius = 0.0;                // indicator_ball

  /// tanh(||z||^2_{X^m}).
  static ObservableSpec tanh_norm();
  /// z(0)_component, i.e. F(x) = x(0).
  static ObservableSpec velocity(std::size_t component);
  static ObservableSpec indicator(std::optional<FourierField> center, double radius);

  double operator()(const FourierField& z) const;
  /// Value at sample n of a record (fields are needed only for an indicator
  /// with a nonzero center).
  double at(const TrajectoryRecord& record, std::size_t n) const;

  std::string name() const;
};

/// Lipschitz constant of r -> tanh(r^2) on [0, inf), by dense grid search.
double tanh_square_lipschitz();

/// Trapezoid time average of psi along the record.
double time_average(const TrajectoryRecord& record, const ObservableSpec& psi);

struct OccupationReport {
  double fraction = 0.0;    // share of samples with ||Z(t) - z|| < delta
  double window_min = 0.0;  // min sliding-window fraction over the second half (liminf proxy)
};

/// `z` nullopt is the zero field (the attractor).
OccupationReport occupation_fraction(const TrajectoryRecord& record, const std::optional<FourierField>& z,
                                     double delta);

enum class MomentStart { radius, stationary };

struct MomentScanOptions {
  double radius = 1.0;
  int power = 1;  // n in E||V||^{2n}
  double horizon = 50.0;
  int ensemble = 500;
  int grid_points = 100;
  std::uint64_t seed = 1;
  MomentStart start = MomentStart::radius;
  unsigned threads = 1;
};

struct MomentScanReport {
  std::vector<double> times;
  std::vector<double> moments;   // ensemble mean of ||V(t)||^{2n}_{X^m}
  std::vector<double> std_errors;
  double time_max = 0.0;
  double settled = 0.0;          // mean over the last quarter of the grid
  double stationary = 0.0;       // closed form E||V||^{2n} under the invariant law
};

/// E||V||^{2n}_{X^m} of a Gaussian field with the stationary law, from the
/// eigenvalues of the energy matrices (cumulant recursion).
double stationary_moment(const SpectrumModel& model, int power);

MomentScanReport moment_scan(const ModelPtr& model, const MomentScanOptions& options);

struct ProbabilityEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

struct StabilityOptions {
  double horizon = 1.0;
  double dt = 1e-3;
  int ensemble = 200;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// Fraction of runs with ||Z^x(T) - Y^x(T)||_{X^m} < eps.
ProbabilityEstimate stability_probe(const ModelPtr& model, const FourierField& x, double eps,
                                    const StabilityOptions& options);

struct EPropertyOptions {
  double horizon = 2.0;
  double dt = 1e-2;
  int ensemble = 200;
  int record_every = 10;
  std::uint64_t seed = 1;
  std::optional<FourierField> direction;  // unit vector in X^m; drawn when absent
  unsigned threads = 1;
};

struct EPropertyReport {
  std::vector<double> offsets;
  std::vector<double> D;          // max_t |mean psi(Z^x(t)) - mean psi(Z^{x'}(t))|
  std::vector<double> sigma;      // MC standard error of the difference at the argmax
  std::vector<double> argmax_time;
};

/// Shared-noise coupling of Z^x and Z^{x + h v} for each offset h.
EPropertyReport e_property_probe(const ModelPtr& model, const FourierField& x, const std::vector<double>& offsets,
                                 const ObservableSpec& psi, const EPropertyOptions& options);

struct LlnOptions {
  double dt = 1e-2;
  int ensemble = 100;
  int record_every = 1;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct LlnReport {
  std::vector<double> horizons;
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<double> ratios;  // variances[i+1] / variances[i]
};

/// Ensemble variance of (1/T) int_0^T psi(Z(t)) dt over nested horizons.
LlnReport lln_test(const ModelPtr& model, const ObservableSpec& psi, const std::vector<double>& horizons,
                   const LlnOptions& options);

/// Time average of psi over [0, horizon] of a record (trapezoid, horizon must
/// be a recorded time up to 1e-9 relative).
double time_average_until(const TrajectoryRecord& record, const ObservableSpec& psi, double horizon);

/// Index of the recorded time equal to `t` (1e-9 relative), or throws.
std::size_t record_index_at(const TrajectoryRecord& record, double t);

/// Random unit direction in X^m drawn from the stationary law.
FourierField random_unit_direction(const ModelPtr& model, std::uint64_t seed);

}  // namespace tracerflow
