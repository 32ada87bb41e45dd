#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace smci {

/// SplitMix64 step; used for seeding and for deriving independent streams.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives the seed of child stream `stream` from `parent`.
///
/// split_seed(m, i) = splitmix64 applied to (splitmix64(m) ^ (i * golden)).
/// Chains, trials and replicas all get their seeds through this function, so
/// a sample is fully determined by its own position in the seed tree.
constexpr std::uint64_t split_seed(std::uint64_t parent, std::uint64_t stream) noexcept {
  std::uint64_t s = parent;
  std::uint64_t mixed = splitmix64(s) ^ (stream * 0x9e3779b97f4a7c15ULL);
  return splitmix64(mixed);
}

/// xoshiro256** 1.0 (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;
  static constexpr std::string_view name = "xoshiro256**";

  explicit constexpr Xoshiro256(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
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

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi) (half-open, inherited from uniform()).
  constexpr double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  /// Fair coin from the top bit.
  constexpr bool coin() noexcept { return ((*this)() >> 63) != 0; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

using Rng = Xoshiro256;

}  // namespace smci
