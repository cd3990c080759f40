#pragma once

#include <cstdint>
#include <random>

namespace maploc {

/// Mixes a base seed with a stream index (SplitMix64 finalizer) so that
/// per-frame / per-stage generators are independent but reproducible.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seeded generator with a platform-independent real conversion
/// (std::uniform_real_distribution differs between standard libraries).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform in [-half_width, half_width).
  double symmetric(double half_width) { return half_width * (2.0 * uniform01() - 1.0); }

  bool bernoulli(double p) { return uniform01() < p; }

  std::uint64_t next() { return engine_(); }

private:
  std::mt19937_64 engine_;
};

}  // namespace maploc
