#pragma once

#include <lpmap/bounded_table.hpp>
#include <lpmap/grow_policy.hpp>
#include <lpmap/migrator.hpp>
#include <lpmap/size_estimator.hpp>
#include <lpmap/sync_gate.hpp>
#include <lpmap/update_fn.hpp>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <utility>
#include <vector>

namespace lpmap {

struct KeyValue {
  std::uint64_t key;
  std::uint64_t value;

  friend bool operator==(const KeyValue&, const KeyValue&) = default;
  friend auto operator<=>(const KeyValue&, const KeyValue&) = default;
};

/// Growing, deletion-capable table built from a sequence of bounded tables
/// ("versions"). When the trigger fires, the current version is migrated into
/// a fresh one of the chosen capacity, which is then published. Threads use
/// the table through per-thread Handles, which cache the current version and
/// count their own insertions and deletions.
///
/// Handles must be destroyed before the table.
template <class Hasher = Hash64>
class GrowTable {
 public:
  using Table = BoundedTable<Hasher>;
  class Handle;

  explicit GrowTable(std::size_t expected_n = 0, GrowConfig config = {}, Hasher hasher = Hasher{});
  ~GrowTable();

  GrowTable(const GrowTable&) = delete;
  GrowTable& operator=(const GrowTable&) = delete;

  Handle get_handle() { return Handle(*this); }

  /// Builds a table from `pairs`, keeping the last value given for each key.
  /// Pairs are sorted by hash so that `threads` workers insert disjoint,
  /// mostly non-overlapping slot ranges.
  static std::unique_ptr<GrowTable> build_from(std::span<const KeyValue> pairs, GrowConfig config = {},
                                               unsigned threads = 1);

  SizeEstimate estimate_size() const {
    auto version = current();
    return lpmap::estimate_size(version->counters, threads_, thresholds_);
  }
  /// Exact element count; only valid while nobody modifies the table.
  std::int64_t exact_size_quiescent() const {
    auto version = current();
    return lpmap::exact_size_quiescent(version->counters, registry_, version->number);
  }

  std::size_t capacity() const { return current()->table.capacity(); }
  std::uint64_t version() const noexcept { return published_.load(std::memory_order_acquire); }
  std::int64_t insertion_count() const { return current()->counters.insertions(); }
  std::int64_t deletion_count() const { return current()->counters.deletions(); }
  std::size_t migrations() const noexcept { return migrations_.load(std::memory_order_acquire); }
  /// Versions not yet reclaimed (including the current one).
  std::size_t live_versions() const noexcept { return live_versions_->load(std::memory_order_acquire); }
  const GrowConfig& config() const noexcept { return config_; }

  /// Visits every live element of the current version. Quiescent use only.
  template <class Visitor>
  void for_each(Visitor&& visit) const {
    current()->table.for_each(std::forward<Visitor>(visit));
  }

 private:
  struct Version {
    Version(Table&& t, std::uint64_t n, std::shared_ptr<std::atomic<std::size_t>> live)
        : table(std::move(t)), number(n), live_versions(std::move(live)) {
      live_versions->fetch_add(1, std::memory_order_acq_rel);
    }
    ~Version() { live_versions->fetch_sub(1, std::memory_order_acq_rel); }

    Table table;
    const std::uint64_t number;
    GlobalCounters counters;
    std::atomic<bool> migration_claimed{false};
    std::shared_ptr<std::atomic<std::size_t>> live_versions;
  };

  struct Job {
    Job(std::shared_ptr<Version> from, std::shared_ptr<Version> to, MarkMode mode, std::size_t block_size)
        : source(std::move(from)), target(std::move(to)), work(source->table, target->table, mode, block_size) {}

    std::shared_ptr<Version> source;
    std::shared_ptr<Version> target;
    MigrationJob<Table> work;
  };

  bool synchronized() const noexcept { return config_.protocol == ConsistencyProtocol::synchronized; }
  std::shared_ptr<Version> current() const {
    std::lock_guard lock(publish_mutex_);
    return current_;
  }
  std::shared_ptr<Job> active_job() const {
    if (!job_active_.load(std::memory_order_acquire)) return nullptr;
    std::lock_guard lock(publish_mutex_);
    return job_;
  }

  bool start_migration(const std::shared_ptr<Version>& source, MigrationDecision decision);
  void run(Job& job);
  void finish(Job& job);
  void assist(std::uint64_t seen);
  bool migration_over(std::uint64_t seen) const noexcept {
    return synchronized() ? !gate_.raised() : published_.load(std::memory_order_acquire) != seen;
  }
  void pool_loop(unsigned index);

  GrowConfig config_;
  unsigned threads_;
  ThresholdRange thresholds_;
  Hasher hasher_;
  std::shared_ptr<std::atomic<std::size_t>> live_versions_ = std::make_shared<std::atomic<std::size_t>>(0);

  mutable std::mutex publish_mutex_;
  std::shared_ptr<Version> current_;
  std::shared_ptr<Job> job_;
  alignas(kCacheLine) std::atomic<std::uint64_t> published_{1};
  alignas(kCacheLine) std::atomic<bool> job_active_{false};
  std::atomic<std::size_t> migrations_{0};

  HandleRegistry registry_;
  SyncGate gate_{registry_};
  std::atomic<std::uint64_t> handles_created_{0};

  std::mutex pool_mutex_;
  std::condition_variable pool_wakeup_;
  std::shared_ptr<Job> pool_job_;
  std::uint64_t pool_generation_ = 0;
  bool pool_stop_ = false;
  std::vector<std::thread> pool_;
};

/// Per-thread access object. Not thread-safe; may be handed to another thread
/// while idle.
template <class Hasher>
class GrowTable<Hasher>::Handle {
 public:
  Handle(Handle&& other) noexcept
      : owner_(std::exchange(other.owner_, nullptr)),
        slot_(other.slot_),
        version_(std::move(other.version_)),
        counter_(std::move(other.counter_)) {}
  Handle& operator=(Handle&&) = delete;
  Handle(const Handle&) = delete;

  ~Handle() {
    if (owner_ == nullptr) return;
    if (owner_->published_.load(std::memory_order_acquire) == version_->number) {
      counter_->flush(version_->counters);
    }
    owner_->registry_.release(*slot_);
  }

  bool insert(std::uint64_t key, std::uint64_t value) {
    for (;;) {
      if (!enter()) continue;
      const InsertResult result = version_->table.insert(key, value);
      leave();
      switch (result) {
        case InsertResult::inserted:
          count_insertion();
          return true;
        case InsertResult::key_present:
          if (settled()) return false;
          break;
        case InsertResult::marked:
          owner_->assist(version_->number);
          break;
        case InsertResult::overflow:
          on_overflow();
          break;
      }
    }
  }

  template <UpdateFunction F = Overwrite>
  bool update(std::uint64_t key, std::uint64_t arg, const F& fn = F{}) {
    for (;;) {
      if (!enter()) continue;
      const UpdateResult result = owner_->synchronized() ? version_->table.template update<true>(key, arg, fn)
                                                         : version_->table.update(key, arg, fn);
      leave();
      switch (result) {
        case UpdateResult::updated:
          return true;
        case UpdateResult::not_found:
          if (settled()) return false;
          break;
        case UpdateResult::marked:
          owner_->assist(version_->number);
          break;
      }
    }
  }

  /// True if the key was inserted, false if an existing value was updated.
  template <UpdateFunction F = Overwrite>
  bool insert_or_update(std::uint64_t key, std::uint64_t arg, const F& fn = F{}) {
    for (;;) {
      if (!enter()) continue;
      const UpsertResult result = owner_->synchronized()
                                      ? version_->table.template insert_or_update<true>(key, arg, fn)
                                      : version_->table.insert_or_update(key, arg, fn);
      leave();
      switch (result) {
        case UpsertResult::inserted:
          count_insertion();
          return true;
        case UpsertResult::updated:
          return false;
        case UpsertResult::marked:
          owner_->assist(version_->number);
          break;
        case UpsertResult::overflow:
          on_overflow();
          break;
      }
    }
  }

  std::optional<std::uint64_t> find(std::uint64_t key) {
    for (;;) {
      if (!enter()) continue;
      auto result = version_->table.find(key);
      leave();
      if (settled()) return result;
    }
  }

  bool erase(std::uint64_t key) {
    for (;;) {
      if (!enter()) continue;
      const EraseResult result = version_->table.erase(key);
      leave();
      switch (result) {
        case EraseResult::deleted:
          count_deletion();
          return true;
        case EraseResult::not_found:
          if (settled()) return false;
          break;
        case EraseResult::marked:
          owner_->assist(version_->number);
          break;
      }
    }
  }

  const LocalCounter& counter() const noexcept { return *counter_; }
  std::uint64_t cached_version() const noexcept { return version_->number; }

 private:
  friend class GrowTable;

  explicit Handle(GrowTable& owner)
      : owner_(&owner),
        slot_(&owner.registry_.acquire()),
        version_(owner.current()),
        counter_(std::make_unique<LocalCounter>(
            *slot_, owner.thresholds_,
            owner.config_.seed + owner.handles_created_.fetch_add(1, std::memory_order_relaxed))) {
    slot_->version.store(version_->number, std::memory_order_release);
  }

  // Synchronized protocol: raise the busy flag unless a migration is pending
  // (then help or wait and report false). Both protocols: make sure the
  // cached version is the published one.
  bool enter() {
    if (owner_->synchronized()) {
      if (!owner_->gate_.try_enter(*slot_)) {
        owner_->assist(version_->number);
        return false;
      }
    }
    if (version_->number != owner_->published_.load(std::memory_order_acquire)) refresh();
    return true;
  }

  void leave() noexcept {
    if (owner_->synchronized()) owner_->gate_.leave(*slot_);
  }

  void refresh() {
    version_ = owner_->current();
    counter_->discard();  // the migration already counted everything we inserted
    slot_->version.store(version_->number, std::memory_order_release);
  }

  // A negative or read-only answer from the async protocol is only valid if
  // the version it came from was still the published one when we finished.
  bool settled() const noexcept {
    return owner_->synchronized() || version_->number == owner_->published_.load(std::memory_order_acquire);
  }

  void count_insertion() {
    if (counter_->note_insertion(version_->counters)) check_trigger_after_flush();
  }
  void count_deletion() {
    if (counter_->note_deletion(version_->counters)) check_trigger_after_flush();
  }

  void check_trigger_after_flush() {
    const Version& v = *version_;
    const auto decision = check_trigger(v.counters.insertions(), v.counters.deletions(), v.table.capacity(),
                                        owner_->config_);
    if (decision && owner_->start_migration(version_, *decision)) owner_->assist(v.number);
  }

  void on_overflow() {
    const Version& v = *version_;
    const auto decision = check_trigger(v.counters.insertions(), v.counters.deletions(), v.table.capacity(),
                                        owner_->config_, /*overflow=*/true);
    owner_->start_migration(version_, *decision);
    owner_->assist(v.number);
  }

  GrowTable* owner_;
  HandleSlot* slot_;
  std::shared_ptr<Version> version_;
  std::unique_ptr<LocalCounter> counter_;
};

// ---------------------------------------------------------------------------

template <class Hasher>
GrowTable<Hasher>::GrowTable(std::size_t expected_n, GrowConfig config, Hasher hasher)
    : config_(config),
      threads_(config.resolved_threads()),
      thresholds_(config.thresholds.value_or(ThresholdRange::for_threads(threads_))),
      hasher_(hasher) {
  current_ = std::make_shared<Version>(Table(capacity_for(expected_n, config_.min_capacity), Fill::empty, hasher_),
                                       1, live_versions_);
  if (config_.strategy == MigrationStrategy::pool) {
    const unsigned workers = config_.pool_size != 0 ? config_.pool_size : threads_;
    pool_.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool_.emplace_back([this, i] { pool_loop(i); });
  }
}

template <class Hasher>
GrowTable<Hasher>::~GrowTable() {
  {
    std::lock_guard lock(pool_mutex_);
    pool_stop_ = true;
  }
  pool_wakeup_.notify_all();
  for (auto& worker : pool_) worker.join();
}

template <class Hasher>
bool GrowTable<Hasher>::start_migration(const std::shared_ptr<Version>& source, MigrationDecision decision) {
  if (source->migration_claimed.exchange(true, std::memory_order_acq_rel)) return false;
  MarkMode mode = MarkMode::mark;
  if (synchronized()) {
    gate_.raise();
    gate_.wait_for_quiescence();
    mode = MarkMode::none;
  }
  auto target = std::make_shared<Version>(Table(decision.capacity, Fill::uninitialized, hasher_),
                                          source->number + 1, live_versions_);
  auto job = std::make_shared<Job>(source, std::move(target), mode, config_.block_size);
  {
    std::lock_guard lock(publish_mutex_);
    job_ = job;
  }
  job_active_.store(true, std::memory_order_release);
  if (config_.strategy == MigrationStrategy::pool) {
    {
      std::lock_guard lock(pool_mutex_);
      pool_job_ = std::move(job);
      ++pool_generation_;
    }
    pool_wakeup_.notify_all();
  }
  return true;
}

template <class Hasher>
void GrowTable<Hasher>::run(Job& job) {
  if (job.work.participate().finished_last) finish(job);
}

// Runs on the thread that completed the last block: fixes up a failed job,
// resets the counters and publishes the target.
template <class Hasher>
void GrowTable<Hasher>::finish(Job& job) {
  std::shared_ptr<Version> target = job.target;
  std::size_t moved = job.work.moved();
  if (job.work.failed()) {
    for (std::size_t capacity = target->table.capacity() * 2;; capacity *= 2) {
      Table rebuilt(capacity, Fill::empty, hasher_);
      if (auto n = copy_live_elements(job.source->table, rebuilt)) {
        target = std::make_shared<Version>(std::move(rebuilt), target->number, live_versions_);
        moved = *n;
        break;
      }
    }
  }
  target->counters.reset(static_cast<std::int64_t>(moved));
  {
    std::lock_guard lock(publish_mutex_);
    current_ = target;
    job_.reset();
    job_active_.store(false, std::memory_order_release);
    published_.store(target->number, std::memory_order_release);
  }
  if (config_.strategy == MigrationStrategy::pool) {
    std::lock_guard lock(pool_mutex_);
    pool_job_.reset();
  }
  migrations_.fetch_add(1, std::memory_order_acq_rel);
  if (synchronized()) gate_.lower();
  published_.notify_all();
}

// Called by application threads that ran into a migration. User strategy:
// take blocks until none are left. Pool strategy: sleep until published.
template <class Hasher>
void GrowTable<Hasher>::assist(std::uint64_t seen) {
  bool helped = false;
  while (!migration_over(seen)) {
    if (config_.strategy == MigrationStrategy::user && !helped) {
      if (auto job = active_job()) {
        run(*job);
        helped = true;
        continue;
      }
    }
    if ((helped || config_.strategy == MigrationStrategy::pool) &&
        published_.load(std::memory_order_acquire) == seen) {
      published_.wait(seen, std::memory_order_acquire);
    } else {
      std::this_thread::yield();
    }
  }
}

template <class Hasher>
void GrowTable<Hasher>::pool_loop(unsigned index) {
  if (config_.pin_pool) pin_current_thread(index);
  std::uint64_t seen = 0;
  for (;;) {
    std::shared_ptr<Job> job;
    {
      std::unique_lock lock(pool_mutex_);
      pool_wakeup_.wait(lock, [&] { return pool_stop_ || pool_generation_ != seen; });
      if (pool_generation_ == seen) return;  // stopping
      seen = pool_generation_;
      job = pool_job_;
    }
    if (job) run(*job);
  }
}

template <class Hasher>
std::unique_ptr<GrowTable<Hasher>> GrowTable<Hasher>::build_from(std::span<const KeyValue> pairs, GrowConfig config,
                                                                 unsigned threads) {
  struct Entry {
    std::uint64_t hash;
    KeyValue kv;
  };
  const Hasher hasher{};
  std::vector<Entry> entries;
  entries.reserve(pairs.size());
  for (const KeyValue& kv : pairs) entries.push_back({hasher(kv.key), kv});
  // stable: among equal keys the input order survives, so the last one wins
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.hash != b.hash ? a.hash < b.hash : a.kv.key < b.kv.key;
  });
  std::vector<KeyValue> unique;
  unique.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i + 1 < entries.size() && entries[i + 1].kv.key == entries[i].kv.key) continue;
    unique.push_back(entries[i].kv);
  }

  auto table = std::make_unique<GrowTable>(unique.size(), config, hasher);
  Version& version = *table->current_;
  threads = std::max(1u, threads);
  std::vector<std::vector<KeyValue>> spilled(threads);
  {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (unique.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        const std::size_t begin = std::min(unique.size(), t * chunk);
        const std::size_t end = std::min(unique.size(), begin + chunk);
        for (std::size_t i = begin; i < end; ++i) {
          if (version.table.insert(unique[i].key, unique[i].value) != InsertResult::inserted) {
            spilled[t].push_back(unique[i]);
          }
        }
      });
    }
  }
  std::size_t placed = unique.size();
  for (const auto& s : spilled) placed -= s.size();
  version.counters.reset(static_cast<std::int64_t>(placed));
  auto handle = table->get_handle();
  for (const auto& s : spilled) {
    for (const KeyValue& kv : s) handle.insert(kv.key, kv.value);
  }
  return table;
}

}  // namespace lpmap
