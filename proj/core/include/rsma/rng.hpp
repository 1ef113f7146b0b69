#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace rsma {

// Seedable, splittable random stream. Each named sub-stream is seeded from
// (parent seed, tag) through SplitMix64, so drawing more values from one
// stage never shifts another stage's sequence.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  RandomStream split(std::string_view tag) const;
  RandomStream split(std::uint64_t index) const;

  double uniform(double lo, double hi);
  double normal(double mean, double stddev);
  // Circularly-symmetric complex Gaussian with E|g|^2 = variance.
  std::complex<double> complex_normal(double variance = 1.0);
  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace rsma
