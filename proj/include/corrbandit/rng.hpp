#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace corrbandit {

// Purposes for derived streams. Streams with different purposes never collide,
// so protocols compared on the same seed see the same clean-reward realization.
enum class StreamPurpose : std::uint64_t {
  Instance = 1,
  Environment = 2,
  Adversary = 3,
  Policy = 4,
  Episode = 5,
};

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Keyed hash of an ordered tuple of integers.
inline constexpr std::uint64_t derive_seed(std::uint64_t key,
                                           std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = mix64(key ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t p : parts) h = mix64(h ^ mix64(p + 0x3c6ef372fe94f82bULL));
  return h;
}

// SplitMix64 stream. Satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Stream(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0,1) with 53 bits; platform-independent unlike std distributions.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  constexpr double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  constexpr bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::uint64_t state_;
};

}  // namespace corrbandit
