#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace aga {

// Deterministic xoshiro256** stream, seeded through splitmix64. All random
// draws in the project go through this generator so that fixtures are
// byte-stable across platforms and standard-library versions.
//
// Stream identity: "aga.rng/1". Bumping the mixing or the draw helpers below
// changes every downstream fixture, so any such change must bump the version.
class Rng {
 public:
  static constexpr std::string_view kVersion = "aga.rng/1";

  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = split_mix(x);
  }

  std::uint64_t next_u64() {
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

  // Uniform in [0, bound). Rejection-free multiply-shift (Lemire) with the
  // usual threshold correction, so the draw count per call is data-dependent
  // but the output stream is fully determined by the seed.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::next_below: bound == 0");
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (lo < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform in [0,1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool next_bernoulli(double p) { return next_unit() < p; }

  // Splittable child stream for (cell, trial) style derivations.
  static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = base;
    x = split_mix(x) ^ (a + 0x9e3779b97f4a7c15ULL);
    x = split_mix(x) ^ (b + 0xbf58476d1ce4e5b9ULL);
    return split_mix(x);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t split_mix(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_[4];
};

}  // namespace aga
