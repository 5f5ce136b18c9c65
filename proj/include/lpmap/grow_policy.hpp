#pragma once

#include <lpmap/cell.hpp>
#include <lpmap/migrator.hpp>
#include <lpmap/size_estimator.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace lpmap {

/// Who performs a migration: application threads that run into it (user),
/// or a dedicated pool of parked threads (pool).
enum class MigrationStrategy { user, pool };

/// How copied cells are kept from changing: mark every cell before copying
/// it (async_mark), or keep operations and migrations disjoint with busy
/// flags and a global grow flag (synchronized).
enum class ConsistencyProtocol { async_mark, synchronized };

struct GrowConfig {
  /// Fill factor (insertions incl. tombstones over capacity) that triggers a migration.
  double alpha = 0.6;
  /// Minimum growth step when a migration grows the table; a power of two.
  std::size_t gamma = 2;
  MigrationStrategy strategy = MigrationStrategy::user;
  ConsistencyProtocol protocol = ConsistencyProtocol::async_mark;
  /// Expected number of concurrent handles p; 0 means hardware concurrency.
  unsigned threads = 0;
  /// Pool threads for the pool strategy; 0 means p.
  unsigned pool_size = 0;
  bool pin_pool = true;
  std::size_t block_size = kMigrationBlock;
  std::size_t min_capacity = kMinCapacity;
  /// Flush threshold range for handle counters; unset means 1..p.
  std::optional<ThresholdRange> thresholds;
  std::uint64_t seed = 0x5eed;

  /// "uaGrow", "usGrow", "paGrow" or "psGrow".
  static std::optional<GrowConfig> for_variant(std::string_view name);
  std::string variant_name() const;
  unsigned resolved_threads() const noexcept;
};

enum class MigrationKind { grow, cleanup, shrink };

struct MigrationDecision {
  std::size_t capacity;
  MigrationKind kind;

  friend bool operator==(const MigrationDecision&, const MigrationDecision&) = default;
};

/// Migration trigger. Fires once I >= alpha * capacity (I counts every
/// insertion, so tombstones are included), or unconditionally on a probe
/// overflow. The new capacity is the smallest power of two holding twice
/// the live estimate I - D, clamped below by `min_capacity`; growing moves
/// by at least `gamma`, and an overflow never shrinks.
std::optional<MigrationDecision> check_trigger(std::int64_t insertions, std::int64_t deletions,
                                               std::size_t capacity, const GrowConfig& config,
                                               bool overflow = false);

/// Pins the calling thread to `cpu` modulo the online CPU count. Returns
/// false when affinity control is unavailable.
bool pin_current_thread(unsigned cpu) noexcept;

}  // namespace lpmap
