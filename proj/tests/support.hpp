#pragma once

#include "tracerflow/field.hpp"
#include "tracerflow/spectrum.hpp"

#include <memory>
#include <vector>

namespace tftest {

using namespace tracerflow;

inline ModelPtr share(SpectrumModel m) { return std::make_shared<const SpectrumModel>(std::move(m)); }

// A single conjugate pair +-k with the given rate and energy.
inline ModelPtr pair_model(std::vector<int> k, double gamma, ComplexMatrix energy, int K = 1, int m = 3) {
  const int d = static_cast<int>(k.size());
  Wavevector w(k);
  ComplexMatrix conj_energy = energy.conjugate();
  std::vector<ModeSpec> modes{{w, gamma, std::move(energy)}, {-w, gamma, std::move(conj_energy)}};
  return share(SpectrumModel(d, K, std::move(modes), m));
}

inline ModelPtr default_model(Projection p = Projection::full, int K = 8) {
  PowerLawSpectrum s;
  s.projection = p;
  s.truncation = K;
  return share(build_power_law_spectrum(s));
}

inline ModelPtr zero_energy(const SpectrumModel& m) { return share(m.scaled(0.0)); }

inline FourierField random_field(const ModelPtr& model, std::uint64_t seed) {
  RandomStream rng(seed);
  return sample_stationary(model, rng);
}

}  // namespace tftest
