#pragma once

// Independent reference implementations used by the tests. None of these
// share code with the library beyond the cell layout and the hash.

#include <lpmap/bounded_table.hpp>
#include <lpmap/cell.hpp>
#include <lpmap/hash.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace oracle {

using lpmap::Cell;
using lpmap::CellView;

/// floor(h * c / 2^64) by 128-bit arithmetic.
inline std::size_t slot(std::uint64_t h, std::size_t c) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(h) * c) >> 64);
}

/// Smallest power of two >= max(2n, 4096), by doubling.
inline std::size_t capacity_by_doubling(std::size_t n) {
  std::size_t c = 1;
  while (c < 2 * n || c < 4096) c *= 2;
  return c;
}

/// Plain re-insertion of every live element of `source` into an empty array
/// of `capacity` cells, visiting source cells in circular order starting just
/// after the first empty cell (cell 0 if there is none). Mark bits are
/// stripped and tombstones dropped.
inline std::vector<CellView> migrate_sequentially(std::span<const Cell> source, std::size_t capacity) {
  std::vector<CellView> target(capacity, CellView{0, 0});
  const std::size_t n = source.size();
  std::size_t start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if ((source[i].key & ~lpmap::kMarkBit) == lpmap::kEmptyKey) {
      start = i + 1;
      break;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const Cell& cell = source[(start + j) % n];
    const std::uint64_t key = cell.key & ~lpmap::kMarkBit;
    if (key == lpmap::kEmptyKey || key == lpmap::kDeletedKey) continue;
    std::size_t i = slot(lpmap::hash64(key), capacity);
    while (target[i].key != 0) i = (i + 1) % capacity;
    target[i] = {key, cell.value};
  }
  return target;
}

inline std::vector<CellView> snapshot(std::span<const Cell> cells) {
  std::vector<CellView> out;
  out.reserve(cells.size());
  for (const Cell& c : cells) out.push_back({c.key, c.value});
  return out;
}

/// Live (key, value) pairs, sorted.
inline std::vector<std::pair<std::uint64_t, std::uint64_t>> live_pairs(std::span<const Cell> cells) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  for (const Cell& c : cells) {
    const std::uint64_t key = c.key & ~lpmap::kMarkBit;
    if (key != lpmap::kEmptyKey && key != lpmap::kDeletedKey) out.emplace_back(key, c.value);
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <class Table>
std::vector<std::pair<std::uint64_t, std::uint64_t>> contents(const Table& table) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  table.for_each([&](std::uint64_t k, std::uint64_t v) { out.emplace_back(k, v); });
  std::sort(out.begin(), out.end());
  return out;
}

/// True if no empty cell lies on the circular path from a live element's
/// home slot to its cell.
inline bool probe_invariant_holds(std::span<const Cell> cells) {
  const std::size_t c = cells.size();
  for (std::size_t i = 0; i < c; ++i) {
    const std::uint64_t key = cells[i].key & ~lpmap::kMarkBit;
    if (key == lpmap::kEmptyKey || key == lpmap::kDeletedKey) continue;
    for (std::size_t j = slot(lpmap::hash64(key), c); j != i; j = (j + 1) % c) {
      if (cells[j].key == 0) return false;
    }
  }
  return true;
}

/// Write observer counting every write attempt per cell.
class CountingObserver {
 public:
  explicit CountingObserver(std::size_t capacity)
      : counts_(std::make_unique<std::atomic<std::uint32_t>[]>(capacity)), capacity_(capacity) {}
  CountingObserver(CountingObserver&&) noexcept = default;
  CountingObserver& operator=(CountingObserver&&) noexcept = default;

  void on_write(std::size_t i) noexcept { counts_[i].fetch_add(1, std::memory_order_relaxed); }
  std::uint32_t count(std::size_t i) const { return counts_[i].load(); }
  std::uint64_t total() const {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < capacity_; ++i) sum += counts_[i].load();
    return sum;
  }
  void reset() {
    for (std::size_t i = 0; i < capacity_; ++i) counts_[i].store(0);
  }

 private:
  std::unique_ptr<std::atomic<std::uint32_t>[]> counts_;
  std::size_t capacity_;
};

using CountedTable = lpmap::BoundedTable<lpmap::Hash64, CountingObserver>;

/// Random user key; small universes give collisions on purpose.
inline std::uint64_t random_key(std::mt19937_64& rng, std::uint64_t universe = lpmap::kMaxUserKey) {
  return std::uniform_int_distribution<std::uint64_t>(1, universe)(rng);
}

/// Fills `table` with distinct random keys up to `fill` of its capacity and
/// erases a `tombstones` fraction of them again.
template <class Table>
std::map<std::uint64_t, std::uint64_t> fill_randomly(Table& table, double fill, double tombstones,
                                                     std::mt19937_64& rng) {
  std::map<std::uint64_t, std::uint64_t> live;
  const auto target = static_cast<std::size_t>(fill * static_cast<double>(table.capacity()));
  std::vector<std::uint64_t> inserted;
  while (inserted.size() < target) {
    const std::uint64_t key = random_key(rng);
    const std::uint64_t value = rng();
    if (table.insert(key, value) == lpmap::InsertResult::inserted) {
      live[key] = value;
      inserted.push_back(key);
    }
  }
  std::bernoulli_distribution erase(tombstones);
  for (std::uint64_t key : inserted) {
    if (erase(rng)) {
      table.erase(key);
      live.erase(key);
    }
  }
  return live;
}

/// H_{N,s} for large N: exact sum of the first terms, Euler-Maclaurin for
/// the tail.
inline double harmonic_large(std::uint64_t n, double s) {
  const std::uint64_t head = std::min<std::uint64_t>(n, 100'000);
  long double sum = 0;
  for (std::uint64_t k = head; k >= 1; --k) sum += std::pow(static_cast<long double>(k), -s);
  if (n == head) return static_cast<double>(sum);
  const long double a = static_cast<long double>(head);
  const long double b = static_cast<long double>(n);
  // sum_{k=a+1}^{b} f(k) with f(x) = x^-s
  long double integral = s == 1.0 ? std::log(b / a) : (std::pow(b, 1 - s) - std::pow(a, 1 - s)) / (1 - s);
  long double ends = (std::pow(b, -s) - std::pow(a, -s)) / 2;
  long double slope = -s * (std::pow(b, -s - 1) - std::pow(a, -s - 1)) / 12;
  return static_cast<double>(sum + integral + ends + slope);
}

}  // namespace oracle
