#pragma once

#include <cstdint>
#include <random>

namespace dopsim {

/// Seeded random source whose output depends only on the seed.
///
/// std::mt19937_64 has a fully specified output sequence, but the standard
/// distributions do not, so uniform and normal variates are derived here from
/// the raw 64-bit stream. This keeps every scenario bit-reproducible across
/// standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Box-Muller, both variates used).
  double normal();
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Independent child seed for stream `index` of a run seeded with `root`
/// (SplitMix64 finalizer over the combined words).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

}  // namespace dopsim
