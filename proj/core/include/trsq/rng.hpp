#pragma once

// Seedable, splittable random source with platform-independent output.
//
// The standard <random> engines are portable but the distributions are not;
// everything downstream needs bit-identical runs for a fixed seed, so the
// few distributions we use are implemented here directly on top of
// xoshiro256** (public domain, Blackman/Vigna).

#include <array>
#include <cstdint>

namespace trsq {

// SplitMix64 finalizer. Used for seeding, stream derivation, and stateless
// noise hashing (see SqOracle).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
  return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    // Expand the seed into xoshiro state; all-zero state is impossible
    // because mix64 is a bijection applied to distinct inputs.
    std::uint64_t s = seed;
    for (auto& w : state_) {
      s += 0x9e3779b97f4a7c15ULL;
      w = mix64(s);
    }
  }

  // Child stream fully determined by (parent seed, label); draw history of
  // the parent does not matter. Labels must be distinct per use site.
  [[nodiscard]] Rng split(std::uint64_t label) const {
    return Rng(hash_combine(seed_, label));
  }

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53 random bits.
  double uniform() noexcept { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  // Uniform integer in [0, bound), bound >= 1. Unbiased (rejection).
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace trsq
