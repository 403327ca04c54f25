#pragma once

#include <cstdint>
#include <limits>

namespace lsam {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the i-th output is a pure function of
/// (seed, stream, i). Two generators with the same key never share state, so
/// per-trial streams can be created on any thread in any order.
///
/// Satisfies UniformRandomBitGenerator and can drive <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL +
                                            0x8cb92ba72f3d8dd7ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * counter_++);
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Fixed stream ids so that problem generation, noise and Monte Carlo trials
// never draw from the same sequence.
namespace streams {
inline constexpr std::uint64_t kRotation = 0x100;
inline constexpr std::uint64_t kSimilarity = 0x200;
inline constexpr std::uint64_t kTrialBase = 0x10000;
}  // namespace streams

}  // namespace lsam
