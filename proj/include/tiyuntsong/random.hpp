#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>

namespace tiyuntsong {

/// SplitMix64 finalizer; used to derive independent stream seeds from a
/// master seed and a few integer coordinates (epoch, match, agent, ...).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

/// Seeded generator with platform-independent derived distributions.
/// std::mt19937_64 is bit-specified by the standard; the standard
/// distributions are not, so the few we need are written out here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n must be positive.
  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  /// Standard normal via Box-Muller (one draw per call, no caching).
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tiyuntsong
