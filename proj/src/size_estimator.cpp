#include <lpmap/size_estimator.hpp>

#include <algorithm>

namespace lpmap {

HandleSlot& HandleRegistry::acquire() {
  std::lock_guard lock(mutex_);
  for (HandleSlot& slot : slots_) {
    if (!slot.active.load(std::memory_order_relaxed)) {
      slot.local_insertions.store(0, std::memory_order_relaxed);
      slot.local_deletions.store(0, std::memory_order_relaxed);
      slot.busy.store(false, std::memory_order_relaxed);
      slot.active.store(true, std::memory_order_release);
      return slot;
    }
  }
  HandleSlot& slot = slots_.emplace_back();
  slot.active.store(true, std::memory_order_release);
  return slot;
}

void HandleRegistry::release(HandleSlot& slot) noexcept {
  std::lock_guard lock(mutex_);
  slot.busy.store(false, std::memory_order_release);
  slot.active.store(false, std::memory_order_release);
}

std::size_t HandleRegistry::active_count() const {
  std::size_t n = 0;
  for_each_active([&](const HandleSlot&) { ++n; });
  return n;
}

LocalCounter::LocalCounter(HandleSlot& slot, ThresholdRange range, std::uint64_t seed)
    : slot_(&slot), rng_(seed), draw_(range.lo, std::max(range.lo, range.hi)), threshold_(draw_(rng_)) {}

bool LocalCounter::note_insertion(GlobalCounters& global) {
  ++insertions_;
  return settle(global);
}

bool LocalCounter::note_deletion(GlobalCounters& global) {
  ++deletions_;
  return settle(global);
}

// Flushes whichever tally reached the threshold. A redraw can land below the
// other tally, so loop until both are under the current threshold again.
bool LocalCounter::settle(GlobalCounters& global) {
  bool flushed = false;
  while (insertions_ >= threshold_ || deletions_ >= threshold_) {
    if (insertions_ >= threshold_) {
      global.add_insertions(insertions_);
      insertions_ = 0;
    }
    if (deletions_ >= threshold_) {
      global.add_deletions(deletions_);
      deletions_ = 0;
    }
    redraw();
    flushed = true;
  }
  publish();
  return flushed;
}

void LocalCounter::flush(GlobalCounters& global) noexcept {
  if (insertions_ != 0) global.add_insertions(insertions_);
  if (deletions_ != 0) global.add_deletions(deletions_);
  discard();
}

void LocalCounter::discard() noexcept {
  insertions_ = 0;
  deletions_ = 0;
  publish();
}

void LocalCounter::publish() noexcept {
  slot_->local_insertions.store(insertions_, std::memory_order_relaxed);
  slot_->local_deletions.store(deletions_, std::memory_order_relaxed);
}

SizeEstimate estimate_size(const GlobalCounters& counters, unsigned p, ThresholdRange range) {
  const std::int64_t slack = static_cast<std::int64_t>(p) * range.max_residual();
  const std::int64_t net = counters.insertions() - counters.deletions();
  return {static_cast<std::uint64_t>(std::max<std::int64_t>(0, net - slack)),
          static_cast<std::uint64_t>(std::max<std::int64_t>(0, net + slack))};
}

std::int64_t exact_size_quiescent(const GlobalCounters& counters, const HandleRegistry& registry,
                                  std::uint64_t version) {
  std::int64_t total = counters.insertions() - counters.deletions();
  registry.for_each_active([&](const HandleSlot& slot) {
    if (slot.version.load(std::memory_order_acquire) != version) return;
    total += slot.local_insertions.load(std::memory_order_relaxed);
    total -= slot.local_deletions.load(std::memory_order_relaxed);
  });
  return total;
}

}  // namespace lpmap
