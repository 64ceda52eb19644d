#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace ocp {

// SplitMix64 finalizer. Used to scramble user seeds and to derive
// substream seeds.
std::uint64_t mix64(std::uint64_t x);

// Seed of substream `stream` under base seed `base`:
//   derive_seed(base, stream) = mix64(base + (stream + 1) * 0x9E3779B97F4A7C15)
// Everything seeded through this rule (per-repetition data generation,
// per-repetition splits) is reproducible from the single experiment seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// Seeded random generator with portable output. The engine is
// std::mt19937_64, whose sequence is pinned by the C++ standard; all
// distribution transforms are implemented here rather than through
// std::*_distribution (which vary across standard libraries), so every
// drawn value is bit-identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01();

  // Standard normal via Box-Muller; the paired value is cached, so draws
  // come in a fixed order regardless of call sites.
  double normal();

  // Uniform integer on [lo, hi], unbiased (rejection sampling).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  Rng substream(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

  // Fisher-Yates using uniform_int, back to front.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i - 1)));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace ocp
