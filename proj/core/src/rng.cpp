#include "rsma/rng.hpp"

#include <cmath>

namespace rsma {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

// FNV-1a, stable across platforms (std::hash is not).
std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : tag) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Box-Muller keeps the draw sequence independent of the standard library's
// normal_distribution implementation.
double standard_normal(std::mt19937_64& eng) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  double u1 = 0.0;
  do {
    u1 = static_cast<double>(eng() >> 11) * kScale;
  } while (u1 <= 0.0);
  const double u2 = static_cast<double>(eng() >> 11) * kScale;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

RandomStream RandomStream::split(std::string_view tag) const {
  return RandomStream(splitmix64(seed_ ^ hash_tag(tag)));
}

RandomStream RandomStream::split(std::uint64_t index) const {
  return RandomStream(splitmix64(seed_ + 0x632be59bd9b4e019ULL * (index + 1)));
}

double RandomStream::uniform(double lo, double hi) {
  constexpr double kScale = 1.0 / 9007199254740992.0;
  const double u = static_cast<double>(engine_() >> 11) * kScale;
  return lo + (hi - lo) * u;
}

double RandomStream::normal(double mean, double stddev) {
  return mean + stddev * standard_normal(engine_);
}

std::complex<double> RandomStream::complex_normal(double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = standard_normal(engine_);
  const double im = standard_normal(engine_);
  return {s * re, s * im};
}

}  // namespace rsma
