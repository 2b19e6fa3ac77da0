#pragma once

#include <cstdint>

namespace pmcts {

/// SplitMix64 finalizer. Bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Combines two words into one key; not symmetric in its arguments.
constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(a) ^ (b + 0x632be59bd9b4e019ULL));
}

/// Counter-based random stream.
///
/// The output at position i is a pure function of (key, i), so any stream can
/// be recreated from its (seed, stream id) pair regardless of which thread or
/// in which order it is consumed. MCTS derives one stream per iteration.
class RandomStream {
 public:
  constexpr RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : key_(mix64(seed, stream_id)) {}

  constexpr std::uint64_t next() noexcept { return mix64(key_ ^ mix64(counter_++)); }

  /// Uniform integer in [0, bound). bound must be nonzero.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    // Rejection on the biased tail.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t consumed() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace pmcts
