#include <lpmap/grow_policy.hpp>

#include <algorithm>
#include <bit>
#include <thread>

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#endif

namespace lpmap {

std::optional<GrowConfig> GrowConfig::for_variant(std::string_view name) {
  GrowConfig config;
  if (name == "uaGrow") {
    config.strategy = MigrationStrategy::user;
    config.protocol = ConsistencyProtocol::async_mark;
  } else if (name == "usGrow") {
    config.strategy = MigrationStrategy::user;
    config.protocol = ConsistencyProtocol::synchronized;
  } else if (name == "paGrow") {
    config.strategy = MigrationStrategy::pool;
    config.protocol = ConsistencyProtocol::async_mark;
  } else if (name == "psGrow") {
    config.strategy = MigrationStrategy::pool;
    config.protocol = ConsistencyProtocol::synchronized;
  } else {
    return std::nullopt;
  }
  return config;
}

std::string GrowConfig::variant_name() const {
  std::string name = strategy == MigrationStrategy::user ? "u" : "p";
  name += protocol == ConsistencyProtocol::async_mark ? "a" : "s";
  return name + "Grow";
}

unsigned GrowConfig::resolved_threads() const noexcept {
  if (threads != 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::optional<MigrationDecision> check_trigger(std::int64_t insertions, std::int64_t deletions,
                                               std::size_t capacity, const GrowConfig& config, bool overflow) {
  if (!overflow && static_cast<double>(insertions) < config.alpha * static_cast<double>(capacity)) {
    return std::nullopt;
  }
  const auto live = static_cast<std::size_t>(std::max<std::int64_t>(0, insertions - deletions));
  std::size_t target = std::bit_ceil(std::max(2 * live, config.min_capacity));
  if (target > capacity) target = std::max(target, capacity * config.gamma);
  if (overflow) target = std::max(target, capacity);
  const MigrationKind kind = target > capacity    ? MigrationKind::grow
                             : target == capacity ? MigrationKind::cleanup
                                                  : MigrationKind::shrink;
  return MigrationDecision{target, kind};
}

bool pin_current_thread(unsigned cpu) noexcept {
#if defined(__linux__)
  const unsigned online = std::max(1u, std::thread::hardware_concurrency());
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(cpu % online, &set);
  return pthread_setaffinity_np(pthread_self(), sizeof(set), &set) == 0;
#else
  (void)cpu;
  return false;
#endif
}

}  // namespace lpmap
