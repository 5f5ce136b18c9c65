#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <mutex>
#include <random>

namespace lpmap {

inline constexpr std::size_t kCacheLine = 64;

/// Shared insertion counter I and deletion counter D of one table version.
/// Both lag the truth by whatever handles have not flushed yet.
class GlobalCounters {
 public:
  explicit GlobalCounters(std::int64_t insertions = 0) noexcept : insertions_(insertions) {}

  std::int64_t add_insertions(std::int64_t n) noexcept {
    return insertions_.fetch_add(n, std::memory_order_acq_rel) + n;
  }
  std::int64_t add_deletions(std::int64_t n) noexcept {
    return deletions_.fetch_add(n, std::memory_order_acq_rel) + n;
  }
  std::int64_t insertions() const noexcept { return insertions_.load(std::memory_order_acquire); }
  std::int64_t deletions() const noexcept { return deletions_.load(std::memory_order_acquire); }

  /// State after a migration: I := moved elements, D := 0.
  void reset(std::int64_t insertions) noexcept {
    insertions_.store(insertions, std::memory_order_release);
    deletions_.store(0, std::memory_order_release);
  }

 private:
  alignas(kCacheLine) std::atomic<std::int64_t> insertions_;
  alignas(kCacheLine) std::atomic<std::int64_t> deletions_{0};
};

/// Per-handle state that other threads may need to look at: unflushed
/// counts (quiescent exact size), the version the handle works on and the
/// busy flag of the synchronized migration protocol. One cache line each.
struct alignas(kCacheLine) HandleSlot {
  std::atomic<std::int64_t> local_insertions{0};
  std::atomic<std::int64_t> local_deletions{0};
  std::atomic<std::uint64_t> version{0};
  std::atomic<bool> busy{false};
  std::atomic<bool> active{false};
};

/// Growth-only list of handle slots. Registration takes a lock; table
/// operations never touch the registry. Released slots are reused.
class HandleRegistry {
 public:
  HandleSlot& acquire();
  void release(HandleSlot& slot) noexcept;

  /// Visits every active slot. Safe concurrently with acquire/release; the
  /// values read are only meaningful at quiescent points.
  template <class Visitor>
  void for_each_active(Visitor&& visit) const {
    std::lock_guard lock(mutex_);
    for (const HandleSlot& slot : slots_) {
      if (slot.active.load(std::memory_order_acquire)) visit(slot);
    }
  }

  std::size_t active_count() const;

 private:
  mutable std::mutex mutex_;
  std::deque<HandleSlot> slots_;
};

/// Inclusive range the flush threshold is drawn from; defaults to 1..p.
struct ThresholdRange {
  unsigned lo = 1;
  unsigned hi = 1;

  static ThresholdRange for_threads(unsigned p) noexcept { return {1, p == 0 ? 1 : p}; }
  /// Worst-case unflushed count of one counter of one handle.
  unsigned max_residual() const noexcept { return hi - 1; }
};

/// The counting half of a handle. Successful insertions and deletions are
/// tallied locally and pushed to the global counters once the tally reaches
/// a random threshold, which is redrawn after every flush.
class LocalCounter {
 public:
  LocalCounter(HandleSlot& slot, ThresholdRange range, std::uint64_t seed);

  /// Both return true when the call flushed into `global`; that is the point
  /// where the caller re-checks the migration trigger.
  bool note_insertion(GlobalCounters& global);
  bool note_deletion(GlobalCounters& global);

  /// Pushes any residual counts.
  void flush(GlobalCounters& global) noexcept;
  /// Drops residual counts without publishing them (used when the counted
  /// elements were already accounted for by a migration).
  void discard() noexcept;

  unsigned threshold() const noexcept { return threshold_; }
  std::int64_t pending_insertions() const noexcept { return insertions_; }
  std::int64_t pending_deletions() const noexcept { return deletions_; }

 private:
  bool settle(GlobalCounters& global);
  void redraw() { threshold_ = draw_(rng_); }
  void publish() noexcept;

  HandleSlot* slot_;
  std::mt19937_64 rng_;
  std::uniform_int_distribution<unsigned> draw_;
  unsigned threshold_;
  std::int64_t insertions_ = 0;
  std::int64_t deletions_ = 0;
};

struct SizeEstimate {
  std::uint64_t lower;
  std::uint64_t upper;
};

/// Bounds on the element count from I - D and the worst-case unflushed
/// slack of `p` handles: true size lies in [lower, upper] at quiescence.
SizeEstimate estimate_size(const GlobalCounters& counters, unsigned p, ThresholdRange range);
inline SizeEstimate estimate_size(const GlobalCounters& counters, unsigned p) {
  return estimate_size(counters, p, ThresholdRange::for_threads(p));
}

/// I - D plus every active handle's unflushed counts for `version`.
/// Requires that nobody modifies the table during the call; not checked.
std::int64_t exact_size_quiescent(const GlobalCounters& counters, const HandleRegistry& registry,
                                  std::uint64_t version);

}  // namespace lpmap
