#pragma once

#include <lpmap/size_estimator.hpp>

#include <atomic>
#include <thread>
#include <vector>

namespace lpmap {

/// Busy-flag / grow-flag handshake of the synchronized protocol. An operation
/// raises its handle's busy flag and then checks the grow flag; a migration
/// raises the grow flag and then waits until every busy flag has been seen
/// down at least once. After that no operation can overlap the migration.
class SyncGate {
 public:
  explicit SyncGate(const HandleRegistry& registry) noexcept : registry_(registry) {}

  /// False (with the busy flag lowered again) if a migration is pending.
  bool try_enter(HandleSlot& slot) noexcept {
    slot.busy.store(true, std::memory_order_seq_cst);
    if (grow_flag_.load(std::memory_order_seq_cst)) {
      slot.busy.store(false, std::memory_order_release);
      return false;
    }
    return true;
  }

  void leave(HandleSlot& slot) noexcept { slot.busy.store(false, std::memory_order_release); }

  /// True for the one caller that raised the flag.
  bool raise() noexcept {
    bool expected = false;
    return grow_flag_.compare_exchange_strong(expected, true, std::memory_order_seq_cst);
  }

  void wait_for_quiescence() const {
    std::vector<const HandleSlot*> slots;
    registry_.for_each_active([&](const HandleSlot& slot) { slots.push_back(&slot); });
    for (const HandleSlot* slot : slots) {
      while (slot->busy.load(std::memory_order_seq_cst)) std::this_thread::yield();
    }
  }

  void lower() noexcept { grow_flag_.store(false, std::memory_order_seq_cst); }
  bool raised() const noexcept { return grow_flag_.load(std::memory_order_acquire); }

 private:
  const HandleRegistry& registry_;
  alignas(kCacheLine) std::atomic<bool> grow_flag_{false};
};

}  // namespace lpmap
