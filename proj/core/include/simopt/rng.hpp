#pragma once

// Counter-based random streams built on Philox4x64-10. A stream is the
// triple (seed, stream_id, counter); block i of a stream is the keyed
// permutation of counter+i, so any range of blocks can be generated
// independently of the others.

#include <array>
#include <cstdint>

namespace simopt {

/// 128-bit block counter.
struct Counter128 {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  Counter128 plus(std::uint64_t n) const noexcept {
    Counter128 c{lo + n, hi};
    if (c.lo < lo) ++c.hi;
    return c;
  }

  friend bool operator==(const Counter128&, const Counter128&) = default;
};

struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  Counter128 counter{};

  void advance(std::uint64_t blocks) noexcept { counter = counter.plus(blocks); }

  friend bool operator==(const RngStream&, const RngStream&) = default;
};

// Stream-id allocation used by the benchmark driver.
inline constexpr std::uint64_t kInstanceStream = 0;
inline constexpr std::uint64_t kOptimizerStream = 1;
inline constexpr std::uint64_t repetition_stream(std::uint64_t rep) noexcept { return 2 + rep; }

using PhiloxBlock = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

PhiloxBlock philox4x64_10(PhiloxBlock counter, PhiloxKey key) noexcept;

/// Block `offset` of the stream (relative to its current counter).
PhiloxBlock stream_block(const RngStream& stream, std::uint64_t offset) noexcept;

/// Top 53 bits mapped to [0, 1).
inline double to_unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace simopt
