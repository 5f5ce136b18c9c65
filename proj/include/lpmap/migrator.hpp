#pragma once

#include <lpmap/bounded_table.hpp>
#include <lpmap/cell.hpp>

#include <atomic>
#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace lpmap {

inline constexpr std::size_t kMigrationBlock = 4096;

/// `mark`: concurrent writers may still be running, so every source cell is
/// frozen with the mark bit before it is read. `none`: the caller guarantees
/// that no writer touches the source during the migration.
enum class MarkMode { mark, none };

struct BlockRange {
  std::size_t begin;
  std::size_t end;

  friend bool operator==(const BlockRange&, const BlockRange&) = default;
};

struct Participation {
  std::size_t moved = 0;
  /// True for exactly one participant: the one that completed the last piece
  /// of work. It is responsible for finalizing the job.
  bool finished_last = false;
};

/// One source -> target migration shared by any number of cooperating
/// threads. Work is dealt in blocks of source cells through a single atomic
/// counter.
///
/// Growing (target capacity >= source capacity): a cluster is a maximal run
/// of non-empty cells. Because slots are taken from the top hash bits, a
/// cluster [a, b] of the source lands inside target cells
/// [a * gamma, (b + 1) * gamma] no matter what the rest of the table holds,
/// so clusters are migrated independently and the result is identical to a
/// sequential re-insertion in source order. A block owns the clusters that
/// start inside it; its region of the target runs between the first empty
/// cells at or after (begin - 1) and (end - 1), and the owning thread writes
/// every cell of that region exactly once.
///
/// Shrinking: each block maps onto a disjoint target block. Phase one places
/// the elements whose probe stays inside that target block with plain stores;
/// after all blocks are through phase one, the rest are inserted atomically.
template <class Table>
class MigrationJob {
 public:
  MigrationJob(Table& source, Table& target, MarkMode mode, std::size_t block_size = kMigrationBlock)
      : source_(source),
        target_(target),
        mode_(mode),
        block_size_(block_size < source.capacity() ? block_size : source.capacity()),
        blocks_((source.capacity() + block_size_ - 1) / block_size_),
        growing_(target.capacity() >= source.capacity()),
        shift_(growing_ ? std::countr_zero(target.capacity() / source.capacity())
                        : std::countr_zero(source.capacity() / target.capacity())),
        leftovers_(growing_ ? 0 : blocks_) {
    assert(block_size > 0);
    assert(std::has_single_bit(source.capacity()) && std::has_single_bit(target.capacity()));
  }

  MigrationJob(const MigrationJob&) = delete;
  MigrationJob& operator=(const MigrationJob&) = delete;

  Table& source() noexcept { return source_; }
  Table& target() noexcept { return target_; }
  std::size_t block_size() const noexcept { return block_size_; }
  std::size_t block_count() const noexcept { return blocks_; }
  bool growing() const noexcept { return growing_; }

  /// Next unclaimed block of source cells, or nothing once all are dealt.
  std::optional<BlockRange> claim_block() noexcept {
    const std::size_t index = next_block_.fetch_add(1, std::memory_order_relaxed);
    if (index >= blocks_) return std::nullopt;
    return block(index);
  }

  BlockRange block(std::size_t index) const noexcept {
    const std::size_t begin = index * block_size_;
    const std::size_t end = begin + block_size_;
    return {begin, end < source_.capacity() ? end : source_.capacity()};
  }

  /// Migrates every cluster that starts in `range` and initializes the rest
  /// of the block's target region. Growing jobs only. Returns elements moved.
  std::size_t migrate_block_grow(BlockRange range);

  /// Phase one of a shrinking job for `range`; elements that do not fit are
  /// kept for phase two. Returns elements placed.
  std::size_t migrate_block_shrink(BlockRange range);

  /// Phase two of a shrinking job: atomically inserts the elements the given
  /// block left over. Call only after every block finished phase one.
  std::size_t migrate_leftovers(std::size_t block_index);

  std::size_t leftover_count() const {
    std::size_t n = 0;
    for (const auto& l : leftovers_) n += l.size();
    return n;
  }

  /// Claims and migrates blocks until none are left. For shrinking jobs this
  /// includes waiting at the phase barrier and helping with phase two.
  Participation participate();

  bool complete() const noexcept { return finished_.load(std::memory_order_acquire) == total_work(); }

  /// Set when the target turned out too small (a probe exceeded the target's
  /// probe limit). The source is still intact; the finalizer must rebuild
  /// into a larger table.
  bool failed() const noexcept { return failed_.load(std::memory_order_acquire); }

  /// Sum of the per-participant moved tallies: the new insertion count I.
  std::size_t moved() const noexcept { return moved_.load(std::memory_order_acquire); }

 private:
  std::size_t total_work() const noexcept { return growing_ ? blocks_ : 2 * blocks_; }

  /// Frozen contents of source cell `i` (unwrapped index), mark bit removed.
  CellView take(std::size_t i) {
    const std::size_t at = i & (source_.capacity() - 1);
    if (mode_ == MarkMode::mark) {
      const std::uint64_t key = source_.mark(at);
      return {unmarked(key), source_.read(at).value};
    }
    return source_.read(at);
  }

  /// First empty source cell at or after unwrapped index `from`, marking
  /// everything it passes; nothing if the table has no empty cell at all.
  std::optional<std::size_t> boundary_from(std::size_t from) {
    for (std::size_t i = from; i < from + source_.capacity(); ++i) {
      if (take(i).key == kEmptyKey) return i;
    }
    return std::nullopt;
  }

  void place_cluster(std::size_t first, const std::vector<CellView>& elements, std::size_t length,
                     std::vector<CellView>& scratch);
  std::size_t migrate_without_empty_cell(BlockRange range);
  void note_probe(std::size_t distance) noexcept {
    if (distance >= target_.probe_limit()) failed_.store(true, std::memory_order_release);
  }

  Table& source_;
  Table& target_;
  MarkMode mode_;
  std::size_t block_size_;
  std::size_t blocks_;
  bool growing_;
  int shift_;
  std::vector<std::vector<CellView>> leftovers_;

  alignas(64) std::atomic<std::size_t> next_block_{0};
  alignas(64) std::atomic<std::size_t> next_leftover_{0};
  alignas(64) std::atomic<std::size_t> phase_one_done_{0};
  alignas(64) std::atomic<std::size_t> finished_{0};
  alignas(64) std::atomic<std::size_t> moved_{0};
  std::atomic<bool> failed_{false};
};

template <class Table>
std::size_t MigrationJob<Table>::migrate_block_grow(BlockRange range) {
  assert(growing_);
  const std::size_t capacity = source_.capacity();
  const std::size_t target_mask = target_.capacity() - 1;

  const auto start = boundary_from(range.begin + capacity - 1);
  if (!start) return migrate_without_empty_cell(range);
  const std::size_t stop = *boundary_from(range.end + capacity - 1);

  std::vector<CellView> elements;
  std::vector<CellView> scratch;
  std::size_t moved = 0;
  std::size_t cursor = (*start + 1) << shift_;  // first target cell not yet written
  std::size_t i = *start + 1;
  while (i < stop) {
    if (take(i).key == kEmptyKey) {
      ++i;
      continue;
    }
    const std::size_t first = i;
    elements.clear();
    for (CellView cell = take(i); cell.key != kEmptyKey; cell = take(++i)) {
      if (cell.key != kDeletedKey) elements.push_back(cell);
    }
    // cluster is [first, i - 1]; its target range is [first*g, i*g]
    for (; cursor < (first << shift_); ++cursor) target_.store(cursor & target_mask, {kEmptyKey, 0});
    const std::size_t length = ((i - first) << shift_) + 1;
    place_cluster(first << shift_, elements, length, scratch);
    cursor = (first << shift_) + length;
    moved += elements.size();
  }
  for (const std::size_t end = (stop + 1) << shift_; cursor < end; ++cursor) {
    target_.store(cursor & target_mask, {kEmptyKey, 0});
  }
  return moved;
}

// Re-inserts one cluster's elements, in source order, into a private copy of
// its target range and writes the range out once.
template <class Table>
void MigrationJob<Table>::place_cluster(std::size_t first, const std::vector<CellView>& elements,
                                        std::size_t length, std::vector<CellView>& scratch) {
  const std::size_t target_mask = target_.capacity() - 1;
  const std::size_t origin = first & target_mask;
  scratch.assign(length, CellView{kEmptyKey, 0});
  for (const CellView& element : elements) {
    const std::size_t home = (target_.home(element.key) - origin) & target_mask;
    std::size_t at = home;
    while (at < length && scratch[at].key != kEmptyKey) ++at;
    if (at >= length) throw std::logic_error("cluster migration left its target range");
    note_probe(at - home);
    scratch[at] = element;
  }
  for (std::size_t j = 0; j < length; ++j) target_.store((origin + j) & target_mask, scratch[j]);
}

// No empty cell anywhere: there are no cluster borders to split on. The owner
// of block 0 migrates the whole ring sequentially; everyone else does nothing.
template <class Table>
std::size_t MigrationJob<Table>::migrate_without_empty_cell(BlockRange range) {
  if (range.begin != 0) return 0;
  const std::size_t target_capacity = target_.capacity();
  const std::size_t target_mask = target_capacity - 1;
  for (std::size_t j = 0; j < target_capacity; ++j) target_.store(j, {kEmptyKey, 0});
  std::size_t moved = 0;
  for (std::size_t i = 0; i < source_.capacity(); ++i) {
    const CellView cell = take(i);
    if (cell.key == kEmptyKey || cell.key == kDeletedKey) continue;
    const std::size_t home = target_.home(cell.key);
    std::size_t distance = 0;
    while (target_.read((home + distance) & target_mask).key != kEmptyKey) {
      if (++distance == target_capacity) {
        failed_.store(true, std::memory_order_release);
        return moved;
      }
    }
    note_probe(distance);
    target_.store((home + distance) & target_mask, cell);
    ++moved;
  }
  return moved;
}

template <class Table>
std::size_t MigrationJob<Table>::migrate_block_shrink(BlockRange range) {
  assert(!growing_);
  const std::size_t scale = std::size_t{1} << shift_;
  const std::size_t lo = (range.begin + scale - 1) >> shift_;
  const std::size_t hi = (range.end + scale - 1) >> shift_;
  for (std::size_t j = lo; j < hi; ++j) target_.store(j, {kEmptyKey, 0});

  auto& leftovers = leftovers_[range.begin / block_size_];
  std::size_t moved = 0;
  for (std::size_t i = range.begin; i < range.end; ++i) {
    const CellView cell = take(i);
    if (cell.key == kEmptyKey || cell.key == kDeletedKey) continue;
    const std::size_t home = target_.home(cell.key);
    std::size_t at = home;
    if (home >= lo && home < hi) {
      while (at < hi && target_.read(at).key != kEmptyKey) ++at;
    }
    if (home < lo || at >= hi || at - home >= target_.probe_limit()) {
      leftovers.push_back(cell);
      continue;
    }
    target_.store(at, cell);
    ++moved;
  }
  return moved;
}

template <class Table>
std::size_t MigrationJob<Table>::migrate_leftovers(std::size_t block_index) {
  std::size_t moved = 0;
  for (const CellView& cell : leftovers_[block_index]) {
    switch (target_.insert(cell.key, cell.value)) {
      case InsertResult::inserted:
        ++moved;
        break;
      case InsertResult::overflow:
        failed_.store(true, std::memory_order_release);
        return moved;
      case InsertResult::key_present:
      case InsertResult::marked:
        throw std::logic_error("shrink migration met a duplicate or marked target cell");
    }
  }
  return moved;
}

template <class Table>
Participation MigrationJob<Table>::participate() {
  Participation result;
  std::size_t finished_here = 0;
  while (auto range = claim_block()) {
    result.moved += growing_ ? migrate_block_grow(*range) : migrate_block_shrink(*range);
    ++finished_here;
    if (!growing_) phase_one_done_.fetch_add(1, std::memory_order_acq_rel);
  }
  if (!growing_) {
    while (phase_one_done_.load(std::memory_order_acquire) < blocks_) std::this_thread::yield();
    for (std::size_t index = next_leftover_.fetch_add(1, std::memory_order_relaxed); index < blocks_;
         index = next_leftover_.fetch_add(1, std::memory_order_relaxed)) {
      result.moved += migrate_leftovers(index);
      ++finished_here;
    }
  }
  moved_.fetch_add(result.moved, std::memory_order_acq_rel);
  if (finished_here > 0) {
    result.finished_last = finished_.fetch_add(finished_here, std::memory_order_acq_rel) + finished_here == total_work();
  }
  return result;
}

/// Sequentially inserts every live element of a quiescent (or fully marked)
/// `source` into the empty table `target`, scanning from cell 0. Returns the
/// number of elements moved, or nothing if `target` overflowed.
template <class Table>
std::optional<std::size_t> copy_live_elements(const Table& source, Table& target) {
  std::size_t moved = 0;
  for (std::size_t i = 0; i < source.capacity(); ++i) {
    const CellView cell = source.read(i);
    const std::uint64_t key = unmarked(cell.key);
    if (key == kEmptyKey || key == kDeletedKey) continue;
    if (target.insert(key, cell.value) != InsertResult::inserted) return std::nullopt;
    ++moved;
  }
  return moved;
}

}  // namespace lpmap
