#pragma once

#include <lpmap/cell.hpp>
#include <lpmap/grow_policy.hpp>
#include <lpmap/hash.hpp>
#include <lpmap/update_fn.hpp>

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lpmap {

/// Single-threaded linear probing table with the same cell layout, sentinels
/// and slot mapping as the concurrent tables, but plain loads and stores.
/// With a GrowConfig it migrates like the growing table (same trigger and
/// capacity rule, tombstones dropped); without one it is bounded and a
/// probe overflow throws std::length_error.
template <class Hasher = Hash64>
class SequentialTable {
 public:
  explicit SequentialTable(std::size_t capacity, std::optional<GrowConfig> growth = std::nullopt,
                           Hasher hasher = Hasher{})
      : cells_(capacity, Cell{kEmptyKey, 0}), growth_(std::move(growth)), hasher_(hasher) {}

  std::size_t capacity() const noexcept { return cells_.size(); }
  std::size_t size() const noexcept { return insertions_ - deletions_; }
  std::size_t migrations() const noexcept { return migrations_; }

  bool insert(std::uint64_t key, std::uint64_t value) {
    for (;;) {
      const Probe p = probe(key);
      if (p.found) return false;
      if (p.free) {
        cells_[*p.free] = {key, value};
        after_insertion();
        return true;
      }
      if (!grow_on_overflow()) return false;
    }
  }

  template <UpdateFunction F = Overwrite>
  bool update(std::uint64_t key, std::uint64_t arg, const F& fn = F{}) {
    const Probe p = probe(key);
    if (!p.found) return false;
    Cell& cell = cells_[*p.found];
    cell.value = fn(key, cell.value, arg);
    return true;
  }

  template <UpdateFunction F = Overwrite>
  bool insert_or_update(std::uint64_t key, std::uint64_t arg, const F& fn = F{}) {
    for (;;) {
      const Probe p = probe(key);
      if (p.found) {
        Cell& cell = cells_[*p.found];
        cell.value = fn(key, cell.value, arg);
        return false;
      }
      if (p.free) {
        cells_[*p.free] = {key, arg};
        after_insertion();
        return true;
      }
      if (!grow_on_overflow()) return false;
    }
  }

  std::optional<std::uint64_t> find(std::uint64_t key) const {
    const Probe p = probe(key);
    if (!p.found) return std::nullopt;
    return cells_[*p.found].value;
  }

  bool erase(std::uint64_t key) {
    const Probe p = probe(key);
    if (!p.found) return false;
    cells_[*p.found].key = kDeletedKey;
    ++deletions_;
    return true;
  }

  template <class Visitor>
  void for_each(Visitor&& visit) const {
    for (const Cell& cell : cells_) {
      if (cell.key != kEmptyKey && cell.key != kDeletedKey) visit(cell.key, cell.value);
    }
  }

 private:
  struct Probe {
    std::optional<std::size_t> found;
    std::optional<std::size_t> free;
  };

  Probe probe(std::uint64_t key) const {
    assert(is_user_key(key));
    const std::size_t mask = cells_.size() - 1;
    const std::size_t limit = std::min(cells_.size(), kMaxProbe);
    std::size_t i = slot_of(hasher_(key), cells_.size());
    for (std::size_t probed = 0; probed < limit; ++probed, i = (i + 1) & mask) {
      if (cells_[i].key == key) return {i, std::nullopt};
      if (cells_[i].key == kEmptyKey) return {std::nullopt, i};
    }
    return {};
  }

  void after_insertion() {
    ++insertions_;
    if (!growth_) return;
    if (auto decision = check_trigger(static_cast<std::int64_t>(insertions_), static_cast<std::int64_t>(deletions_),
                                      cells_.size(), *growth_)) {
      migrate(decision->capacity);
    }
  }

  bool grow_on_overflow() {
    if (!growth_) throw std::length_error("sequential table is full");
    const auto decision = check_trigger(static_cast<std::int64_t>(insertions_),
                                        static_cast<std::int64_t>(deletions_), cells_.size(), *growth_, true);
    migrate(std::max(decision->capacity, 2 * cells_.size()));
    return true;
  }

  // Re-inserts the live elements in circular order starting after an empty
  // cell. For growing and same-size migrations this is exactly the placement
  // the parallel cluster migration produces.
  void migrate(std::size_t capacity) {
    std::vector<Cell> old(capacity, Cell{kEmptyKey, 0});
    old.swap(cells_);
    const std::size_t n = old.size();
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (old[i].key == kEmptyKey) {
        start = i + 1;
        break;
      }
    }
    const std::size_t mask = capacity - 1;
    std::size_t live = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const Cell& cell = old[(start + j) % n];
      if (cell.key == kEmptyKey || cell.key == kDeletedKey) continue;
      std::size_t i = slot_of(hasher_(cell.key), capacity);
      while (cells_[i].key != kEmptyKey) i = (i + 1) & mask;
      cells_[i] = cell;
      ++live;
    }
    insertions_ = live;
    deletions_ = 0;
    ++migrations_;
  }

  std::vector<Cell> cells_;
  std::optional<GrowConfig> growth_;
  Hasher hasher_;
  std::size_t insertions_ = 0;
  std::size_t deletions_ = 0;
  std::size_t migrations_ = 0;
};

}  // namespace lpmap
