#include "support.hpp"

#include "tracerflow/ergodic.hpp"
#include "tracerflow/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tracerflow;
using tftest::default_model;
using tftest::random_field;
using tftest::zero_energy;

namespace {

TrajectoryRecord run(const ModelPtr& m, double horizon, double dt, std::uint64_t seed, bool fields = false) {
  LagrangianOptions o;
  o.horizon = horizon;
  o.dt = dt;
  o.seed = seed;
  o.store_fields = fields;
  return run_lagrangian(m, o);
}

// Time average with a batch-means standard error.
std::pair<double, double> batched_average(const TrajectoryRecord& rec, const ObservableSpec& psi, int batches) {
  const std::size_t per = (rec.size() - 1) / static_cast<std::size_t>(batches);
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t n = b * per; n < (b + 1) * per; ++n) s += psi.at(rec, n);
    means.push_back(s / static_cast<double>(per));
  }
  return {mean(means), standard_error(means)};
}

}  // namespace

TEST(Observable, Values) {
  const auto m = default_model();
  const FourierField z = random_field(m, 1);
  const double n2 = std::pow(sobolev_norm(z, 3.0), 2);
  EXPECT_DOUBLE_EQ(ObservableSpec::tanh_norm()(z), std::tanh(n2));
  EXPECT_DOUBLE_EQ(ObservableSpec::velocity(1)(z), value_at_origin(z)[1]);
  EXPECT_EQ(ObservableSpec::indicator(std::nullopt, 1e9)(z), 1.0);
  EXPECT_EQ(ObservableSpec::indicator(z, 1e-9)(z), 1.0);
  EXPECT_THROW(ObservableSpec::indicator(std::nullopt, 0.0), std::invalid_argument);
  EXPECT_NEAR(tanh_square_lipschitz(), 1.1131159, 1e-6);
}

TEST(TimeAverage, ConstantAndZero) {
  const auto rec = run(default_model(), 2.0, 0.01, 2);
  EXPECT_DOUBLE_EQ(time_average(rec, ObservableSpec::indicator(std::nullopt, 1e9)), 1.0);
  const auto zero = run(zero_energy(*default_model()), 2.0, 0.01, 2);
  EXPECT_EQ(time_average(zero, ObservableSpec::tanh_norm()), 0.0);
}

TEST(TimeAverage, IndependentLongRunsAgree) {
  const auto m = default_model();
  const auto psi = ObservableSpec::tanh_norm();
  const auto [a, sa] = batched_average(run(m, 500.0, 0.01, 3), psi, 25);
  const auto [b, sb] = batched_average(run(m, 500.0, 0.01, 4), psi, 25);
  EXPECT_LT(std::abs(a - b), 4.0 * std::hypot(sa, sb));
}

TEST(Occupation, TrivialCases) {
  const auto rec = run(default_model(), 2.0, 0.01, 5);
  EXPECT_EQ(occupation_fraction(rec, std::nullopt, 1e9).fraction, 1.0);
  const auto zero = run(zero_energy(*default_model()), 2.0, 0.01, 5);
  const auto occ = occupation_fraction(zero, std::nullopt, 1e-6);
  EXPECT_EQ(occ.fraction, 1.0);
  EXPECT_EQ(occ.window_min, 1.0);
  EXPECT_THROW(occupation_fraction(rec, std::nullopt, 0.0), std::invalid_argument);
}

TEST(Occupation, MedianBall) {
  const auto rec = run(default_model(), 200.0, 0.01, 6);
  const double delta = 2.0 * median(rec.field_norms);
  const auto occ = occupation_fraction(rec, std::nullopt, delta);
  EXPECT_GT(occ.fraction, 0.5);
  EXPECT_GT(occ.window_min, 0.0);
  EXPECT_LE(occ.fraction, 1.0);
}

TEST(Occupation, NonzeroCenterNeedsFields) {
  const auto m = default_model();
  const auto rec = run(m, 0.5, 0.01, 7, true);
  const auto occ = occupation_fraction(rec, rec.fields.front(), 1e-12);
  EXPECT_GT(occ.fraction, 0.0);
  const auto bare = run(m, 0.5, 0.01, 7, false);
  EXPECT_THROW(occupation_fraction(bare, rec.fields.front(), 1.0), std::invalid_argument);
}

TEST(StationaryMoment, FirstMomentIsEnergySum) {
  const auto m = default_model(Projection::incompressible);
  double direct = 0.0;
  for (std::size_t i = 0; i < m->size(); ++i) {
    direct += std::pow(m->wavenumber(i), 6) * m->mode(i).energy.trace().real();
  }
  EXPECT_NEAR(stationary_moment(*m, 1), direct, 1e-12 * direct);
}

TEST(StationaryMoment, SecondMomentMatchesSampling) {
  const auto m = default_model();
  RandomStream rng(8);
  std::vector<double> x(20000);
  for (auto& v : x) v = std::pow(sobolev_norm(sample_stationary(m, rng), 3.0), 4);
  EXPECT_NEAR(mean(x), stationary_moment(*m, 2), 4.0 * standard_error(x));
}

TEST(MomentScan, ZeroEnergyCases) {
  const auto m = zero_energy(*default_model());
  MomentScanOptions o;
  o.radius = 0.0;
  o.horizon = 1.0;
  o.ensemble = 4;
  o.grid_points = 10;
  const auto r = moment_scan(m, o);
  EXPECT_EQ(r.time_max, 0.0);

  // A nonzero start decays deterministically, mode by mode.
  o.radius = 2.0;
  o.power = 2;
  o.seed = 9;
  const auto d = moment_scan(m, o);
  const FourierField x = 2.0 * random_unit_direction(m, derive_seed(o.seed, 0xD1EC7104ULL));
  for (std::size_t p = 0; p < d.times.size(); ++p) {
    const double expected = std::pow(sobolev_norm(apply_semigroup(x, d.times[p]), 3.0), 4);
    EXPECT_NEAR(d.moments[p], expected, 1e-10 * (expected + 1e-300));
    EXPECT_GE(d.moments[p], 0.0);
  }
  EXPECT_NEAR(d.moments.front(), 16.0, 1e-10);
}

TEST(MomentScan, StationaryStartSettles) {
  MomentScanOptions o;
  o.start = MomentStart::stationary;
  o.horizon = 50.0;
  o.ensemble = 500;
  o.seed = 10;
  const auto r = moment_scan(default_model(), o);
  EXPECT_LT(std::abs(r.settled - r.stationary) / r.stationary, 0.2);
  EXPECT_LT(r.time_max, 1.2 * r.stationary);
}

TEST(MomentScan, LargeStartDecaysToPlateau) {
  MomentScanOptions o;
  o.radius = 10.0;
  o.horizon = 10.0;
  o.ensemble = 500;
  o.grid_points = 40;
  o.seed = 11;
  const auto r = moment_scan(default_model(), o);
  for (std::size_t p = 1; p < r.times.size(); ++p) {
    const double noise = 3.0 * std::hypot(r.std_errors[p], r.std_errors[p - 1]);
    EXPECT_LE(r.moments[p], r.moments[p - 1] + noise);
  }
  EXPECT_LT(std::abs(r.settled - r.stationary) / r.stationary, 0.2);
}

TEST(Stability, TrivialCases) {
  StabilityOptions o;
  o.ensemble = 10;
  o.horizon = 0.1;
  const auto m0 = zero_energy(*default_model());
  EXPECT_EQ(stability_probe(m0, random_unit_direction(m0, 1), 1e-9, o).estimate, 1.0);
  const auto m = default_model();
  EXPECT_EQ(stability_probe(m, random_unit_direction(m, 1), 1e9, o).estimate, 1.0);
}

TEST(Stability, NoiseBallAtUnitTime) {
  const auto m = default_model();
  StabilityOptions o;
  o.horizon = 1.0;
  o.ensemble = 200;
  o.seed = 12;
  const double eps = 3.0 * std::sqrt(stationary_moment(*m, 1));
  EXPECT_GT(stability_probe(m, FourierField(m), eps, o).estimate, 0.9);
}

TEST(EProperty, ZeroOffsetIsExactlyZero) {
  const auto m = default_model();
  EPropertyOptions o;
  o.horizon = 0.5;
  o.ensemble = 8;
  const auto r = e_property_probe(m, random_field(m, 13), {0.0}, ObservableSpec::tanh_norm(), o);
  EXPECT_EQ(r.D[0], 0.0);
}

TEST(EProperty, ZeroEnergyContraction) {
  const auto m = zero_energy(*default_model());
  EPropertyOptions o;
  o.horizon = 1.0;
  o.ensemble = 2;
  const FourierField x = 0.5 * random_unit_direction(m, 14);
  const double lip = tanh_square_lipschitz();
  const std::vector<double> offsets{1.0, 0.5, 0.25, 0.125};
  const auto r = e_property_probe(m, x, offsets, ObservableSpec::tanh_norm(), o);
  for (std::size_t i = 0; i < offsets.size(); ++i) EXPECT_LE(r.D[i], 1.1 * lip * offsets[i]);
}

TEST(EProperty, MonotoneWithinNoise) {
  const auto m = default_model();
  EPropertyOptions o;
  o.horizon = 2.0;
  o.ensemble = 200;
  o.seed = 15;
  const std::vector<double> offsets{1.0, 0.5, 0.25, 0.125};
  const auto r = e_property_probe(m, FourierField(m), offsets, ObservableSpec::tanh_norm(), o);
  for (std::size_t i = 1; i < offsets.size(); ++i) EXPECT_LE(r.D[i], r.D[i - 1] + 3.0 * r.sigma[i - 1]);
  EXPECT_THROW(e_property_probe(m, FourierField(m), {0.1, 0.2}, ObservableSpec::tanh_norm(), o),
               std::invalid_argument);
}

TEST(Lln, ConstantObservableHasNoVariance) {
  LlnOptions o;
  o.ensemble = 4;
  o.dt = 0.05;
  const auto r = lln_test(default_model(), ObservableSpec::indicator(std::nullopt, 1e9), {1.0, 2.0}, o);
  EXPECT_EQ(r.variances, (std::vector<double>{0.0, 0.0}));
}

TEST(Lln, VarianceDecays) {
  const auto m = default_model();
  LlnOptions o;
  o.ensemble = 100;
  o.dt = 0.02;
  o.seed = 16;
  for (const auto& psi : {ObservableSpec::velocity(0), ObservableSpec::tanh_norm()}) {
    const auto r = lln_test(m, psi, {12.5, 50.0}, o);
    EXPECT_LE(r.ratios[0], 0.6) << psi.name();
  }
}
