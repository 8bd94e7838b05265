#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace tracerflow {

/// splitmix64 finalizer. Bijective on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of run `index` under `master`. Depends only on the pair, never on
/// which worker executes the run.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// One independent random stream. Not thread-safe; give each task its own.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};  // ziggurat
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace tracerflow
