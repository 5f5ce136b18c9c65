#pragma once

#include <lpmap/cell.hpp>
#include <lpmap/hash.hpp>
#include <lpmap/update_fn.hpp>

#include <atomic>
#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <span>

namespace lpmap {

enum class InsertResult { inserted, key_present, overflow, marked };
enum class UpdateResult { updated, not_found, marked };
enum class UpsertResult { inserted, updated, overflow, marked };
enum class EraseResult { deleted, not_found, marked };

// `marked` is only ever reported while a migration is freezing the table.

/// Default write hook: compiles away. Tests substitute a counting observer.
struct NoWriteObserver {
  explicit NoWriteObserver(std::size_t) noexcept {}
  void on_write(std::size_t) noexcept {}
};

enum class Fill { empty, uninitialized };

namespace detail {
struct CellArrayDeleter {
  void operator()(Cell* cells) const noexcept { ::operator delete[](cells, std::align_val_t{64}); }
};
using CellArray = std::unique_ptr<Cell[], CellArrayDeleter>;

inline CellArray allocate_cells(std::size_t capacity, Fill fill) {
  auto* raw = static_cast<Cell*>(::operator new[](capacity * sizeof(Cell), std::align_val_t{64}));
  if (fill == Fill::empty) std::memset(static_cast<void*>(raw), 0, capacity * sizeof(Cell));
  return CellArray(raw);
}
}  // namespace detail

/// Bounded lock-free linear-probing table ("folklore" table). Cells are
/// modified with double-width compare-exchange only; lookups read the key
/// word and then the value word. Deletion leaves a tombstone that is never
/// reused, so capacity is consumed by every successful insertion.
template <class Hasher = Hash64, class Observer = NoWriteObserver>
class BoundedTable {
 public:
  using hasher_type = Hasher;
  using observer_type = Observer;

  /// `capacity` must be a power of two.
  explicit BoundedTable(std::size_t capacity, Fill fill = Fill::empty, Hasher hasher = Hasher{})
      : cells_(detail::allocate_cells(capacity, fill)),
        capacity_(capacity),
        mask_(capacity - 1),
        probe_limit_(capacity < kMaxProbe ? capacity : kMaxProbe),
        hasher_(hasher),
        observer_(capacity) {
    assert(std::has_single_bit(capacity));
  }

  static BoundedTable for_elements(std::size_t expected_n) { return BoundedTable(capacity_for(expected_n)); }

  BoundedTable(BoundedTable&&) noexcept = default;
  BoundedTable& operator=(BoundedTable&&) noexcept = default;

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t probe_limit() const noexcept { return probe_limit_; }
  std::uint64_t hash(std::uint64_t key) const noexcept { return hasher_(key); }
  std::size_t home(std::uint64_t key) const noexcept { return slot_of(hasher_(key), capacity_); }
  const Hasher& hasher() const noexcept { return hasher_; }
  Observer& observer() noexcept { return observer_; }

  InsertResult insert(std::uint64_t key, std::uint64_t value) {
    assert(is_user_key(key));
    std::size_t i = home(key);
    for (std::size_t probed = 0; probed < probe_limit_;) {
      Cell& cell = cells_[i];
      const std::uint64_t current = load_key(cell);
      if (current == kEmptyKey) {
        CellView expected{kEmptyKey, 0};
        observer_.on_write(i);
        if (compare_exchange_cell(cell, expected, {key, value})) return InsertResult::inserted;
        continue;  // lost the race for this cell; look at it again
      }
      if (unmarked(current) == key) return InsertResult::key_present;
      if (current == (kEmptyKey | kMarkBit)) return InsertResult::marked;
      i = (i + 1) & mask_;
      ++probed;
    }
    return InsertResult::overflow;
  }

  /// With `WordUpdates`, update functions that support it are applied with a
  /// single-word atomic instead of a cell compare-exchange. Only valid when no
  /// one can mark cells concurrently.
  template <bool WordUpdates = false, UpdateFunction F>
  UpdateResult update(std::uint64_t key, std::uint64_t arg, const F& fn) {
    assert(is_user_key(key));
    std::size_t i = home(key);
    for (std::size_t probed = 0; probed < probe_limit_;) {
      Cell& cell = cells_[i];
      const std::uint64_t current = load_key(cell);
      if (unmarked(current) == kEmptyKey) return UpdateResult::not_found;
      if (unmarked(current) == key) {
        if (is_marked(current)) return UpdateResult::marked;
        switch (update_cell<WordUpdates>(i, key, arg, fn)) {
          case CellUpdate::done:
            return UpdateResult::updated;
          case CellUpdate::marked:
            return UpdateResult::marked;
          case CellUpdate::gone:
            break;
        }
      }
      i = (i + 1) & mask_;
      ++probed;
    }
    return UpdateResult::not_found;
  }

  /// Insert-or-update: an empty cell on the probe path is claimed with a
  /// compare-exchange (re-examined on failure); a cell holding `key` is
  /// updated atomically to fn(key, current, arg).
  template <bool WordUpdates = false, UpdateFunction F>
  UpsertResult insert_or_update(std::uint64_t key, std::uint64_t arg, const F& fn) {
    assert(is_user_key(key));
    std::size_t i = home(key);
    for (std::size_t probed = 0; probed < probe_limit_;) {
      Cell& cell = cells_[i];
      const std::uint64_t current = load_key(cell);
      if (current == kEmptyKey) {
        CellView expected{kEmptyKey, 0};
        observer_.on_write(i);
        if (compare_exchange_cell(cell, expected, {key, arg})) return UpsertResult::inserted;
        continue;
      }
      if (current == (kEmptyKey | kMarkBit)) return UpsertResult::marked;
      if (unmarked(current) == key) {
        if (is_marked(current)) return UpsertResult::marked;
        switch (update_cell<WordUpdates>(i, key, arg, fn)) {
          case CellUpdate::done:
            return UpsertResult::updated;
          case CellUpdate::marked:
            return UpsertResult::marked;
          case CellUpdate::gone:
            break;
        }
      }
      i = (i + 1) & mask_;
      ++probed;
    }
    return UpsertResult::overflow;
  }

  /// Write-free lookup. The key word is read before the value word, so the
  /// only possible torn reads are "key not yet visible" and "value newer than
  /// the key read", both of which are consistent outcomes.
  std::optional<std::uint64_t> find(std::uint64_t key) const {
    assert(is_user_key(key));
    std::size_t i = home(key);
    for (std::size_t probed = 0; probed < probe_limit_; ++probed) {
      Cell& cell = cells_[i];
      const std::uint64_t current = unmarked(load_key(cell));
      if (current == key) return load_value(cell);
      if (current == kEmptyKey) return std::nullopt;
      i = (i + 1) & mask_;
    }
    return std::nullopt;
  }

  /// Replaces the key with the tombstone key, leaving the value word alone.
  EraseResult erase(std::uint64_t key) {
    assert(is_user_key(key));
    std::size_t i = home(key);
    for (std::size_t probed = 0; probed < probe_limit_; ++probed) {
      Cell& cell = cells_[i];
      std::uint64_t current = load_key(cell);
      if (unmarked(current) == kEmptyKey) return EraseResult::not_found;
      if (unmarked(current) == key) {
        if (is_marked(current)) return EraseResult::marked;
        observer_.on_write(i);
        if (std::atomic_ref<std::uint64_t>(cell.key).compare_exchange_strong(current, kDeletedKey)) {
          return EraseResult::deleted;
        }
        if (is_marked(current)) return EraseResult::marked;
        // someone else deleted it first; a later re-insert would sit further on
      }
      i = (i + 1) & mask_;
    }
    return EraseResult::not_found;
  }

  // -- cell-level access used by migration and tests ------------------------

  /// Key word then value word; the pair may be torn unless the cell is
  /// marked or the table is quiescent.
  CellView read(std::size_t i) const noexcept { return {load_key(cells_[i]), load_value(cells_[i])}; }

  /// Sets the mark bit and returns the key word as it was before. Every
  /// writer's compare-exchange expects an unmarked key, so after this call
  /// the cell is frozen.
  std::uint64_t mark(std::size_t i) noexcept {
    observer_.on_write(i);
    return std::atomic_ref<std::uint64_t>(cells_[i].key).fetch_or(kMarkBit, std::memory_order_acq_rel);
  }

  /// Plain store for cells owned by a single writer (migration targets).
  void store(std::size_t i, CellView cell) noexcept {
    observer_.on_write(i);
    std::atomic_ref<std::uint64_t>(cells_[i].key).store(cell.key, std::memory_order_relaxed);
    std::atomic_ref<std::uint64_t>(cells_[i].value).store(cell.value, std::memory_order_relaxed);
  }

  /// Raw cell array, for quiescent inspection only.
  std::span<const Cell> cells() const noexcept { return {cells_.get(), capacity_}; }

  /// Visits every live (non-empty, non-tombstone) element. Quiescent use only.
  template <class Visitor>
  void for_each(Visitor&& visit) const {
    for (std::size_t i = 0; i < capacity_; ++i) {
      const CellView c = read(i);
      const std::uint64_t key = unmarked(c.key);
      if (key != kEmptyKey && key != kDeletedKey) visit(key, c.value);
    }
  }

 private:
  enum class CellUpdate { done, marked, gone };

  template <bool WordUpdates, class F>
  CellUpdate update_cell(std::size_t i, std::uint64_t key, std::uint64_t arg, const F& fn) {
    Cell& cell = cells_[i];
    if constexpr (WordUpdates && WordUpdateFunction<F>) {
      observer_.on_write(i);
      F::apply_to_word(std::atomic_ref<std::uint64_t>(cell.value), arg);
      return CellUpdate::done;
    } else {
      CellView expected{key, load_value(cell)};
      for (;;) {
        observer_.on_write(i);
        if (compare_exchange_cell(cell, expected, {key, fn(key, expected.value, arg)})) return CellUpdate::done;
        if (expected.key != key) return is_marked(expected.key) ? CellUpdate::marked : CellUpdate::gone;
      }
    }
  }

  detail::CellArray cells_;
  std::size_t capacity_;
  std::size_t mask_;
  std::size_t probe_limit_;
  [[no_unique_address]] Hasher hasher_;
  [[no_unique_address]] Observer observer_;
};

}  // namespace lpmap
