#include "ocp/rng.hpp"

#include <cmath>
#include <numbers>

namespace ocp {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(base + (stream + 1) * 0x9E3779B97F4A7C15ULL);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // u1 in (0, 1] keeps the log finite.
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto bound = static_cast<std::uint64_t>(hi - lo) + 1;
  if (bound == 0) return lo + static_cast<std::int64_t>(next_u64());  // full 64-bit range
  // Reject draws from the tail that would bias the modulus.
  const std::uint64_t rem = (std::uint64_t(-1) % bound + 1) % bound;
  std::uint64_t x = next_u64();
  if (rem != 0) {
    while (x > std::uint64_t(-1) - rem) x = next_u64();
  }
  return lo + static_cast<std::int64_t>(x % bound);
}

}  // namespace ocp
