#pragma once

#include <cstdint>

namespace basinlab {

// Counter-based random numbers. A stream is a 64-bit key plus a counter; the
// value at a given counter depends only on (key, counter), so any symbol of a
// lazily extended word or any trajectory's draws can be regenerated without
// replaying the stream, and the result does not depend on which worker ran it.

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Key for an independent sub-stream identified by (seed, a, b).
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// 64 random bits at position `index` of stream `key`.
constexpr std::uint64_t bits_at(std::uint64_t key, std::uint64_t index) noexcept {
  return splitmix64(key ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Uniform double in [0,1) with 53 random bits.
constexpr double uniform_at(std::uint64_t key, std::uint64_t index) noexcept {
  return static_cast<double>(bits_at(key, index) >> 11) * 0x1.0p-53;
}

/// Sequential view of a counter-based stream.
class CounterStream {
 public:
  explicit CounterStream(std::uint64_t key = 0, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  std::uint64_t next_bits() noexcept { return bits_at(key_, counter_++); }
  double uniform() noexcept { return uniform_at(key_, counter_++); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t consumed() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace basinlab
