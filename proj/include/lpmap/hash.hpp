#pragma once

#include <cstdint>

namespace lpmap {

/// 64-bit key hash: a seeded two-round multiply/xor-shift finalizer. Tables
/// only use the top bits of the result, so every output bit has to mix well.
struct Hash64 {
  static constexpr std::uint64_t kSeed = 0x2545f4914f6cdd1dULL;

  constexpr std::uint64_t operator()(std::uint64_t key) const noexcept {
    std::uint64_t x = key ^ kSeed;
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
  }
};

constexpr std::uint64_t hash64(std::uint64_t key) noexcept { return Hash64{}(key); }

}  // namespace lpmap
