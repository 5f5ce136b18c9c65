#pragma once

#include <atomic>
#include <bit>
#include <cstddef>
#include <cstdint>

namespace lpmap {

// Key space layout. User keys live in [1, 2^63 - 2]; the top bit is reserved
// as the migration mark, so a tombstone can itself be marked.
inline constexpr std::uint64_t kEmptyKey = 0;
inline constexpr std::uint64_t kMarkBit = std::uint64_t{1} << 63;
inline constexpr std::uint64_t kDeletedKey = kMarkBit - 1;
inline constexpr std::uint64_t kMaxUserKey = kDeletedKey - 1;

inline constexpr std::size_t kMinCapacity = 4096;
inline constexpr std::size_t kMaxProbe = 4096;

constexpr bool is_user_key(std::uint64_t key) noexcept {
  return key != kEmptyKey && key <= kMaxUserKey;
}
constexpr bool is_marked(std::uint64_t key) noexcept { return (key & kMarkBit) != 0; }
constexpr std::uint64_t unmarked(std::uint64_t key) noexcept { return key & ~kMarkBit; }

/// One table slot. The key word sits at offset 0 and the value word at
/// offset 8; the pair is written as a unit by a 16-byte compare-exchange,
/// while each word can be loaded on its own (so a reader may see a torn pair).
struct alignas(16) Cell {
  std::uint64_t key;
  std::uint64_t value;
};
static_assert(sizeof(Cell) == 16);
static_assert(offsetof(Cell, key) == 0 && offsetof(Cell, value) == 8);

/// Key/value snapshot as read from a cell; not necessarily atomic as a pair.
struct CellView {
  std::uint64_t key;
  std::uint64_t value;

  friend bool operator==(const CellView&, const CellView&) = default;
};

inline std::uint64_t load_key(Cell& cell, std::memory_order order = std::memory_order_acquire) noexcept {
  return std::atomic_ref<std::uint64_t>(cell.key).load(order);
}

inline std::uint64_t load_value(Cell& cell, std::memory_order order = std::memory_order_acquire) noexcept {
  return std::atomic_ref<std::uint64_t>(cell.value).load(order);
}

/// Double-width compare-exchange on a whole cell. On failure `expected` is
/// refreshed with the cell's current contents.
inline bool compare_exchange_cell(Cell& cell, CellView& expected, CellView desired) noexcept {
#if defined(__x86_64__)
  bool ok;
  std::uint64_t key = expected.key;
  std::uint64_t value = expected.value;
  __asm__ __volatile__("lock cmpxchg16b %1\n\t"
                       "sete %0"
                       : "=q"(ok), "+m"(cell), "+a"(key), "+d"(value)
                       : "b"(desired.key), "c"(desired.value)
                       : "cc", "memory");
  if (!ok) expected = {key, value};
  return ok;
#else
  auto* word = reinterpret_cast<unsigned __int128*>(&cell);
  unsigned __int128 want = (static_cast<unsigned __int128>(expected.value) << 64) | expected.key;
  unsigned __int128 put = (static_cast<unsigned __int128>(desired.value) << 64) | desired.key;
  bool ok = __atomic_compare_exchange_n(word, &want, put, false, __ATOMIC_SEQ_CST, __ATOMIC_SEQ_CST);
  if (!ok) expected = {static_cast<std::uint64_t>(want), static_cast<std::uint64_t>(want >> 64)};
  return ok;
#endif
}

/// Maps a full 64-bit hash onto [0, capacity) by its top log2(capacity) bits,
/// i.e. floor(hash * capacity / 2^64).
constexpr std::size_t slot_of(std::uint64_t hash, std::size_t capacity) noexcept {
  const int bits = std::countr_zero(capacity);
  return bits == 0 ? 0 : static_cast<std::size_t>(hash >> (64 - bits));
}

/// Cell count for a table expected to hold `expected_n` elements: the
/// smallest power of two that is at least 2 * expected_n and at least
/// `min_capacity`.
constexpr std::size_t capacity_for(std::size_t expected_n, std::size_t min_capacity = kMinCapacity) noexcept {
  const std::size_t want = expected_n > min_capacity / 2 ? 2 * expected_n : min_capacity;
  return std::bit_ceil(want);
}

}  // namespace lpmap
