#pragma once

#include <cmath>
#include <cstdint>

namespace vxf {

// splitmix64 finalizer, used both as the generator step and as the
// stream-derivation hash.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic, seedable generator. A stream is fully identified by the
// seed and the tags it was derived with, never by call order in unrelated
// code, so per-voxel and per-token streams are reproducible under any
// degree of parallelism.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix64(seed + 0x9e3779b97f4a7c15ull)) {}

  // Child stream keyed by (this stream, tags...). Signed tags keep their
  // bit pattern, so negative voxel indices derive distinct streams.
  template <typename... Tags>
  Rng derive(Tags... tags) const {
    Rng child = *this;
    ((child.state_ = mix64(child.state_ ^ to_u64(tags) ^ 0x9e3779b97f4a7c15ull)), ...);
    return child;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive integer range. Modulo bias is ~2^-64 and irrelevant here.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  // Standard normal via Box-Muller; always consumes exactly two uniforms.
  double normal() {
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  std::uint64_t state() const { return state_; }

 private:
  template <typename T>
  static constexpr std::uint64_t to_u64(T v) {
    return static_cast<std::uint64_t>(static_cast<std::int64_t>(v));
  }

  std::uint64_t state_;
};

// Seed for a named child stream; Rng(derive_seed(s, tags...)) is the same
// stream whether reached here or via Rng(s).derive(tags...).state().
template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t seed, Tags... tags) {
  return Rng(seed).derive(tags...).state();
}

}  // namespace vxf
