#include <lpmap/bench/scenario.hpp>

#include <lpmap/bounded_table.hpp>
#include <lpmap/grow_policy.hpp>
#include <lpmap/grow_table.hpp>
#include <lpmap/sequential_table.hpp>
#include <lpmap/workload.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <chrono>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

namespace lpmap::bench {

namespace {

constexpr std::array<std::pair<ScenarioKind, std::string_view>, 9> kKinds{{
    {ScenarioKind::insert_prealloc, "insert_prealloc"},
    {ScenarioKind::insert_grow, "insert_grow"},
    {ScenarioKind::find_succ, "find_succ"},
    {ScenarioKind::find_unsucc, "find_unsucc"},
    {ScenarioKind::contention_update, "contention_update"},
    {ScenarioKind::contention_find, "contention_find"},
    {ScenarioKind::aggregation, "aggregation"},
    {ScenarioKind::deletion_window, "deletion_window"},
    {ScenarioKind::mixed, "mixed"},
}};

constexpr std::array<std::pair<Variant, std::string_view>, 6> kVariants{{
    {Variant::folklore, "folklore"},
    {Variant::uaGrow, "uaGrow"},
    {Variant::usGrow, "usGrow"},
    {Variant::paGrow, "paGrow"},
    {Variant::psGrow, "psGrow"},
    {Variant::sequential, "sequential"},
}};

using Clock = std::chrono::steady_clock;

// Raised by operations that observe something a correct table can't produce
// (a fresh key reported present, a bounded table running full).
struct Anomaly : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t value_of(std::uint64_t index) { return index + 1; }

// ---------------------------------------------------------------------------
// Table adapters with a common handle interface.

class FolkloreStore {
 public:
  explicit FolkloreStore(std::size_t capacity) : table_(capacity) {}

  class Handle {
   public:
    explicit Handle(BoundedTable<>& table) : table_(&table) {}
    bool insert(std::uint64_t key, std::uint64_t value) {
      const InsertResult r = table_->insert(key, value);
      if (r == InsertResult::overflow) throw Anomaly("bounded table overflowed");
      return r == InsertResult::inserted;
    }
    template <class F>
    bool update(std::uint64_t key, std::uint64_t arg, const F& fn) {
      return table_->update(key, arg, fn) == UpdateResult::updated;
    }
    template <class F>
    bool insert_or_update(std::uint64_t key, std::uint64_t arg, const F& fn) {
      const UpsertResult r = table_->insert_or_update(key, arg, fn);
      if (r == UpsertResult::overflow) throw Anomaly("bounded table overflowed");
      return r == UpsertResult::inserted;
    }
    std::optional<std::uint64_t> find(std::uint64_t key) { return table_->find(key); }
    bool erase(std::uint64_t key) { return table_->erase(key) == EraseResult::deleted; }

   private:
    BoundedTable<>* table_;
  };

  Handle handle() { return Handle(table_); }
  std::size_t capacity() const { return table_.capacity(); }
  std::size_t migrations() const { return 0; }
  std::int64_t exact_size() const {
    std::int64_t n = 0;
    table_.for_each([&](std::uint64_t, std::uint64_t) { ++n; });
    return n;
  }

 private:
  BoundedTable<> table_;
};

class GrowStore {
 public:
  GrowStore(std::size_t capacity, const GrowConfig& config)
      : table_(std::make_unique<GrowTable<>>(capacity / 2, config)) {}

  using Handle = GrowTable<>::Handle;
  Handle handle() { return table_->get_handle(); }
  std::size_t capacity() const { return table_->capacity(); }
  std::size_t migrations() const { return table_->migrations(); }
  std::int64_t exact_size() const { return table_->exact_size_quiescent(); }

 private:
  std::unique_ptr<GrowTable<>> table_;
};

class SequentialStore {
 public:
  SequentialStore(std::size_t capacity, std::optional<GrowConfig> growth) : table_(capacity, growth) {}

  class Handle {
   public:
    explicit Handle(SequentialTable<>& table) : table_(&table) {}
    bool insert(std::uint64_t key, std::uint64_t value) { return call([&] { return table_->insert(key, value); }); }
    template <class F>
    bool update(std::uint64_t key, std::uint64_t arg, const F& fn) {
      return table_->update(key, arg, fn);
    }
    template <class F>
    bool insert_or_update(std::uint64_t key, std::uint64_t arg, const F& fn) {
      return call([&] { return table_->insert_or_update(key, arg, fn); });
    }
    std::optional<std::uint64_t> find(std::uint64_t key) { return table_->find(key); }
    bool erase(std::uint64_t key) { return table_->erase(key); }

   private:
    template <class Fn>
    static bool call(Fn&& fn) {
      try {
        return fn();
      } catch (const std::length_error& e) {
        throw Anomaly(e.what());
      }
    }
    SequentialTable<>* table_;
  };

  Handle handle() { return Handle(table_); }
  std::size_t capacity() const { return table_.capacity(); }
  std::size_t migrations() const { return table_.migrations(); }
  std::int64_t exact_size() const { return static_cast<std::int64_t>(table_.size()); }

 private:
  SequentialTable<> table_;
};

// ---------------------------------------------------------------------------
// Pregenerated inputs, shared by all repetitions.

struct Inputs {
  std::vector<std::uint64_t> keys;
  /// find_succ: key index per op. mixed: key index per op (insert or find target).
  std::vector<std::uint64_t> index;
  /// mixed: whether op i is an insertion.
  std::vector<std::uint8_t> is_insert;
  std::uint64_t prefill = 0;
  /// aggregation: occurrences per key; contention_update: 1 + last op index per key.
  std::vector<std::uint64_t> expected;
  std::uint64_t distinct = 0;
  std::string provenance;
};

std::uint64_t default_prefill(const Scenario& s) {
  switch (s.kind) {
    case ScenarioKind::find_succ:
    case ScenarioKind::find_unsucc:
      return s.prefill.value_or(s.ops);
    case ScenarioKind::mixed:
      return s.prefill.value_or(8192ULL * s.threads);
    case ScenarioKind::deletion_window:
      return s.window;
    case ScenarioKind::contention_update:
    case ScenarioKind::contention_find:
      return s.zipf_n;
    default:
      return 0;
  }
}

Inputs make_inputs(const Scenario& s) {
  Inputs in;
  in.prefill = default_prefill(s);
  switch (s.kind) {
    case ScenarioKind::insert_prealloc:
    case ScenarioKind::insert_grow: {
      auto seq = gen_uniform(s.ops, s.seed, true);
      in.keys = std::move(seq.keys);
      in.provenance = seq.provenance;
      break;
    }
    case ScenarioKind::find_succ: {
      auto seq = gen_uniform(in.prefill, s.seed, true);
      in.keys = std::move(seq.keys);
      in.provenance = seq.provenance;
      KeyRng rng(s.seed + 1);
      std::uniform_int_distribution<std::uint64_t> pick(0, std::max<std::uint64_t>(in.prefill, 1) - 1);
      in.index.resize(s.ops);
      for (auto& i : in.index) i = pick(rng);
      break;
    }
    case ScenarioKind::find_unsucc:
    case ScenarioKind::deletion_window: {
      auto seq = gen_uniform(in.prefill + s.ops, s.seed, true);
      in.keys = std::move(seq.keys);
      in.provenance = seq.provenance;
      break;
    }
    case ScenarioKind::contention_update:
    case ScenarioKind::contention_find:
    case ScenarioKind::aggregation: {
      auto seq = gen_zipf(s.ops, {s.zipf_n, s.zipf_s, s.seed});
      in.keys = std::move(seq.keys);
      in.provenance = seq.provenance;
      in.expected.assign(s.zipf_n + 1, 0);
      for (std::uint64_t i = 0; i < s.ops; ++i) {
        auto& slot = in.expected[in.keys[i]];
        if (s.kind == ScenarioKind::aggregation) {
          in.distinct += slot == 0;
          ++slot;
        } else {
          slot = i + 1;
        }
      }
      break;
    }
    case ScenarioKind::mixed: {
      KeyRng rng(s.seed + 1);
      std::bernoulli_distribution coin(s.wp);
      in.is_insert.resize(s.ops);
      std::vector<std::uint64_t> inserted_before(s.ops + 1, 0);
      for (std::uint64_t i = 0; i < s.ops; ++i) {
        in.is_insert[i] = coin(rng);
        inserted_before[i + 1] = inserted_before[i] + in.is_insert[i];
      }
      // finds target keys at least 8192 * p places earlier in the insertion
      // sequence; the prefill is always eligible
      const std::uint64_t lag = 8192ULL * s.threads;
      in.index.resize(s.ops);
      for (std::uint64_t i = 0; i < s.ops; ++i) {
        if (in.is_insert[i]) {
          in.index[i] = in.prefill + inserted_before[i];
        } else {
          const std::uint64_t settled = in.prefill + (inserted_before[i] > lag ? inserted_before[i] - lag : 0);
          in.index[i] = std::uniform_int_distribution<std::uint64_t>(0, std::max<std::uint64_t>(settled, 1) - 1)(rng);
        }
      }
      auto seq = gen_uniform(in.prefill + inserted_before[s.ops], s.seed, true);
      in.keys = std::move(seq.keys);
      in.provenance = seq.provenance + " plan_seed=" + std::to_string(s.seed + 1);
      break;
    }
  }
  return in;
}

// ---------------------------------------------------------------------------
// Phase execution.

struct Tally {
  std::uint64_t ops = 0;
  std::uint64_t finds = 0;
  std::uint64_t misses = 0;
  std::uint64_t wrong = 0;
  /// Misses of keys whose insertion had completed before the find started.
  std::uint64_t lost = 0;

  Tally& operator+=(const Tally& o) {
    ops += o.ops;
    finds += o.finds;
    misses += o.misses;
    wrong += o.wrong;
    lost += o.lost;
    return *this;
  }
};

class FirstFailure {
 public:
  void record(std::string message) {
    std::lock_guard lock(mutex_);
    if (message_.empty()) message_ = std::move(message);
    raised_.store(true, std::memory_order_release);
  }
  bool raised() const { return raised_.load(std::memory_order_acquire); }
  std::string message() const {
    std::lock_guard lock(mutex_);
    return message_;
  }

 private:
  mutable std::mutex mutex_;
  std::string message_;
  std::atomic<bool> raised_{false};
};

struct PhaseResult {
  double wall_ms = 0;
  Tally tally;
  bool pinned = true;
};

// Runs op(handle, i, tally) for every i in [begin, end) on s.threads workers
// that claim kWorkBlock indices at a time. Only the operation loop is timed.
template <class Store, class Op>
PhaseResult run_phase(Store& store, const Scenario& s, std::uint64_t begin, std::uint64_t end, FirstFailure& failure,
                      Op&& op) {
  const unsigned p = s.threads;
  std::vector<typename Store::Handle> handles;
  handles.reserve(p);
  for (unsigned t = 0; t < p; ++t) handles.push_back(store.handle());
  std::vector<Tally> tallies(p);
  std::atomic<std::uint64_t> next{begin};
  std::atomic<unsigned> ready{0};
  std::atomic<bool> go{false};
  std::atomic<bool> pinned{true};

  std::vector<std::thread> workers;
  workers.reserve(p);
  for (unsigned t = 0; t < p; ++t) {
    workers.emplace_back([&, t] {
      if (s.pin && !pin_current_thread(t)) pinned.store(false, std::memory_order_relaxed);
      ready.fetch_add(1, std::memory_order_acq_rel);
      while (!go.load(std::memory_order_acquire)) std::this_thread::yield();
      auto& handle = handles[t];
      Tally& tally = tallies[t];
      try {
        while (!failure.raised()) {
          const std::uint64_t b = next.fetch_add(kWorkBlock, std::memory_order_relaxed);
          if (b >= end) break;
          const std::uint64_t e = std::min(end, b + kWorkBlock);
          for (std::uint64_t i = b; i < e; ++i) op(handle, i, tally);
          tally.ops += e - b;
        }
      } catch (const std::exception& ex) {
        failure.record(ex.what());
      }
    });
  }
  while (ready.load(std::memory_order_acquire) < p) std::this_thread::yield();
  const auto start = Clock::now();
  go.store(true, std::memory_order_release);
  for (auto& w : workers) w.join();
  const auto stop = Clock::now();

  PhaseResult result;
  result.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  for (const Tally& t : tallies) result.tally += t;
  result.pinned = s.pin && pinned.load();
  return result;
}

template <class Store>
void prefill_keys(Store& store, const Scenario& s, const Inputs& in, FirstFailure& failure) {
  if (in.prefill == 0) return;
  const bool numbered = s.kind == ScenarioKind::contention_update || s.kind == ScenarioKind::contention_find;
  run_phase(store, s, 0, in.prefill, failure, [&](auto& h, std::uint64_t i, Tally&) {
    // contention scenarios use the whole Zipf universe 1..N
    const std::uint64_t key = numbered ? i + 1 : in.keys[i];
    const std::uint64_t value = s.kind == ScenarioKind::contention_find ? value_of(key) : numbered ? 0 : value_of(i);
    if (!h.insert(key, value)) throw Anomaly("prefill key reported present");
  });
}

// Waits for a key that another worker has yet to insert, then erases it.
template <class Handle>
void erase_eventually(Handle& h, std::uint64_t key) {
  const auto deadline = Clock::now() + std::chrono::seconds(30);
  for (unsigned attempt = 0; !h.erase(key); ++attempt) {
    if ((attempt & 1023) == 1023 && Clock::now() > deadline) throw Anomaly("expired key never became erasable");
    std::this_thread::yield();
  }
}

class Checker {
 public:
  void fail(std::string message) {
    if (pass_) failure_ = std::move(message);
    pass_ = false;
  }
  void expect(bool condition, const std::string& message) {
    if (!condition) fail(message);
  }
  bool pass() const { return pass_; }
  const std::string& failure() const { return failure_; }

 private:
  bool pass_ = true;
  std::string failure_;
};

template <class Store>
void check_roundtrip(Store& store, const Inputs& in, std::uint64_t count, Checker& check) {
  auto h = store.handle();
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto v = h.find(in.keys[i]);
    if (!v || *v != value_of(i)) {
      check.fail("key #" + std::to_string(i) + (v ? " has a wrong value" : " not found"));
      return;
    }
  }
}

template <class Store>
RepResult run_rep(const Scenario& s, const Inputs& in, Store& store, bool& pinned) {
  RepResult rep;
  FirstFailure failure;
  Checker check;
  prefill_keys(store, s, in, failure);

  PhaseResult timed;
  switch (s.kind) {
    case ScenarioKind::insert_prealloc:
    case ScenarioKind::insert_grow:
      timed = run_phase(store, s, 0, s.ops, failure, [&](auto& h, std::uint64_t i, Tally&) {
        if (!h.insert(in.keys[i], value_of(i))) throw Anomaly("fresh key reported present");
      });
      if (s.verify) {
        check_roundtrip(store, in, s.ops, check);
        check.expect(store.exact_size() == static_cast<std::int64_t>(s.ops), "size differs from insertion count");
      }
      break;

    case ScenarioKind::find_succ:
      timed = run_phase(store, s, 0, s.ops, failure, [&](auto& h, std::uint64_t i, Tally& t) {
        const std::uint64_t k = in.index[i];
        const auto v = h.find(in.keys[k]);
        ++t.finds;
        t.misses += !v;
        t.wrong += v && *v != value_of(k);
      });
      if (s.verify) check.expect(timed.tally.misses == 0 && timed.tally.wrong == 0, "successful find missed");
      break;

    case ScenarioKind::find_unsucc:
      timed = run_phase(store, s, 0, s.ops, failure, [&](auto& h, std::uint64_t i, Tally& t) {
        ++t.finds;
        t.misses += !h.find(in.keys[in.prefill + i]);
      });
      if (s.verify) check.expect(timed.tally.misses == timed.tally.finds, "fresh key was found");
      break;

    case ScenarioKind::contention_update:
      timed = run_phase(store, s, 0, s.ops, failure, [&](auto& h, std::uint64_t i, Tally& t) {
        t.wrong += !h.update(in.keys[i], value_of(i), Overwrite{});
      });
      if (s.verify) {
        check.expect(timed.tally.wrong == 0, "update of a present key reported not found");
        auto h = store.handle();
        for (std::uint64_t k = 1; k <= s.zipf_n && check.pass(); ++k) {
          const auto v = h.find(k);
          if (!v) {
            check.fail("key " + std::to_string(k) + " lost");
          } else if (*v == 0) {
            check.expect(in.expected[k] == 0, "key " + std::to_string(k) + " never took a written value");
          } else if (*v > s.ops || in.keys[*v - 1] != k) {
            check.fail("key " + std::to_string(k) + " holds a value written to another key");
          } else if (s.threads == 1) {
            check.expect(*v == in.expected[k], "key " + std::to_string(k) + " does not hold its last write");
          }
        }
      }
      break;

    case ScenarioKind::contention_find:
      timed = run_phase(store, s, 0, s.ops, failure, [&](auto& h, std::uint64_t i, Tally& t) {
        const std::uint64_t key = in.keys[i];
        const auto v = h.find(key);
        ++t.finds;
        t.misses += !v;
        t.wrong += v && *v != value_of(key);
      });
      if (s.verify) check.expect(timed.tally.misses == 0 && timed.tally.wrong == 0, "contended find failed");
      break;

    case ScenarioKind::aggregation:
      timed = run_phase(store, s, 0, s.ops, failure,
                        [&](auto& h, std::uint64_t i, Tally&) { h.insert_or_update(in.keys[i], 1, Add{}); });
      if (s.verify) {
        auto h = store.handle();
        for (std::uint64_t k = 1; k <= s.zipf_n && check.pass(); ++k) {
          if (in.expected[k] == 0) continue;
          const auto v = h.find(k);
          check.expect(v && *v == in.expected[k], "count of key " + std::to_string(k) + " differs from its frequency");
        }
        check.expect(store.exact_size() == static_cast<std::int64_t>(in.distinct), "size differs from distinct keys");
      }
      break;

    case ScenarioKind::deletion_window: {
      const std::uint64_t w = s.window;
      const unsigned segments = std::max(1u, s.checkpoints);
      for (unsigned seg = 0; seg < segments && !failure.raised(); ++seg) {
        const std::uint64_t b = s.ops * seg / segments;
        const std::uint64_t e = s.ops * (seg + 1) / segments;
        PhaseResult part = run_phase(store, s, b, e, failure, [&](auto& h, std::uint64_t i, Tally&) {
          if (!h.insert(in.keys[w + i], value_of(w + i))) throw Anomaly("fresh key reported present");
          erase_eventually(h, in.keys[i]);
        });
        timed.wall_ms += part.wall_ms;
        timed.tally += part.tally;
        timed.pinned = part.pinned;
        if (!s.verify || failure.raised()) continue;
        auto h = store.handle();
        for (std::uint64_t i = e; i < e + w && check.pass(); ++i) {
          const auto v = h.find(in.keys[i]);
          check.expect(v && *v == value_of(i), "window key missing at checkpoint " + std::to_string(seg));
        }
        for (std::uint64_t i = 0; i < e && check.pass(); i += 100) {
          check.expect(!h.find(in.keys[i]), "expired key present at checkpoint " + std::to_string(seg));
        }
        check.expect(store.exact_size() == static_cast<std::int64_t>(w),
                     "size differs from window at checkpoint " + std::to_string(seg));
      }
      break;
    }

    case ScenarioKind::mixed: {
      // per key: insertion completed; the prefill is in before timing starts
      std::unique_ptr<std::atomic<std::uint8_t>[]> inserted;
      if (s.verify) {
        inserted = std::make_unique<std::atomic<std::uint8_t>[]>(in.keys.size());
        for (std::uint64_t k = 0; k < in.prefill; ++k) inserted[k].store(1, std::memory_order_relaxed);
      }
      timed = run_phase(store, s, 0, s.ops, failure, [&](auto& h, std::uint64_t i, Tally& t) {
        const std::uint64_t k = in.index[i];
        if (in.is_insert[i]) {
          if (!h.insert(in.keys[k], value_of(k))) throw Anomaly("fresh key reported present");
          if (inserted) inserted[k].store(1, std::memory_order_release);
          return;
        }
        const bool settled = inserted && inserted[k].load(std::memory_order_acquire) != 0;
        const auto v = h.find(in.keys[k]);
        ++t.finds;
        t.misses += !v;
        t.lost += !v && settled;
        t.wrong += v && *v != value_of(k);
      });
      if (s.verify) {
        check.expect(timed.tally.wrong == 0, "find returned a wrong value");
        check.expect(timed.tally.lost == 0, "find missed a key whose insertion had completed");
        // The lag only guarantees that targets are in when the threads run side
        // by side; with more threads than hardware threads a preempted thread
        // can hold back a whole block, so the miss rate is not judged then.
        if (s.threads <= std::max(1u, std::thread::hardware_concurrency())) {
          check.expect(timed.tally.misses * 1000 < std::max<std::uint64_t>(timed.tally.finds, 1),
                       "unsuccessful finds exceed 0.1% of finds");
        } else {
          rep.note = "miss rate not judged: more threads than hardware threads";
        }
        check_roundtrip(store, in, in.keys.size(), check);
      }
      break;
    }
  }

  if (failure.raised()) check.fail(failure.message());
  if (s.verify) check.expect(timed.tally.ops == s.ops, "executed operation count differs from ops");
  rep.wall_ms = timed.wall_ms;
  rep.mops = timed.wall_ms > 0 ? static_cast<double>(s.ops) / (timed.wall_ms * 1000.0) : 0.0;
  rep.capacity_final = store.capacity();
  rep.mem_bytes = rep.capacity_final * sizeof(Cell);
  rep.oracle_pass = check.pass();
  rep.failure = check.failure();
  rep.ops_executed = timed.tally.ops;
  rep.finds = timed.tally.finds;
  rep.unsuccessful_finds = timed.tally.misses;
  rep.migrations = store.migrations();
  pinned = pinned && timed.pinned;
  return rep;
}

bool is_grow_variant(Variant v) { return v != Variant::folklore && v != Variant::sequential; }

bool growing_scenario(ScenarioKind kind) {
  return kind == ScenarioKind::insert_grow || kind == ScenarioKind::aggregation ||
         kind == ScenarioKind::deletion_window;
}

std::size_t initial_capacity(const Scenario& s, const Inputs& in) {
  if (s.capacity) return std::bit_ceil(std::max<std::size_t>(*s.capacity, 1));
  const bool grows = is_grow_variant(s.variant) || (s.variant == Variant::sequential && growing_scenario(s.kind));
  switch (s.kind) {
    case ScenarioKind::insert_prealloc:
      return capacity_for(s.ops);
    case ScenarioKind::insert_grow:
      return kMinCapacity;
    case ScenarioKind::find_succ:
    case ScenarioKind::find_unsucc:
      return capacity_for(in.prefill);
    case ScenarioKind::contention_update:
    case ScenarioKind::contention_find:
      return capacity_for(s.zipf_n);
    case ScenarioKind::aggregation:
      return grows ? kMinCapacity : capacity_for(s.zipf_n);
    case ScenarioKind::deletion_window:
      return std::bit_ceil(s.window + s.window / 2);
    case ScenarioKind::mixed: {
      const auto total = in.prefill + static_cast<std::uint64_t>(s.wp * static_cast<double>(s.ops));
      return capacity_for(grows ? total / 2 : total);
    }
  }
  return kMinCapacity;
}

template <class Fn>
RepResult with_store(const Scenario& s, const Inputs& in, Fn&& fn) {
  const std::size_t capacity = initial_capacity(s, in);
  switch (s.variant) {
    case Variant::folklore: {
      FolkloreStore store(capacity);
      return fn(store);
    }
    case Variant::sequential: {
      std::optional<GrowConfig> growth;
      if (growing_scenario(s.kind)) growth = GrowConfig{};
      SequentialStore store(capacity, growth);
      return fn(store);
    }
    default: {
      GrowConfig config = *GrowConfig::for_variant(to_string(s.variant));
      config.threads = s.threads;
      config.pin_pool = s.pin;
      config.seed = s.seed;
      GrowStore store(capacity, config);
      return fn(store);
    }
  }
}

}  // namespace

std::optional<ScenarioKind> parse_kind(std::string_view name) {
  for (const auto& [kind, text] : kKinds) {
    if (text == name) return kind;
  }
  return std::nullopt;
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (const auto& [variant, text] : kVariants) {
    if (text == name) return variant;
  }
  return std::nullopt;
}

std::string_view to_string(ScenarioKind kind) {
  for (const auto& [k, text] : kKinds) {
    if (k == kind) return text;
  }
  return "?";
}

std::string_view to_string(Variant variant) {
  for (const auto& [v, text] : kVariants) {
    if (v == variant) return text;
  }
  return "?";
}

std::string validate(const Scenario& s) {
  if (s.ops == 0) return "--ops must be positive";
  if (s.threads == 0) return "--threads must be positive";
  if (s.reps == 0) return "--reps must be at least 1";
  if (!(s.wp >= 0.0 && s.wp <= 1.0)) return "--wp must lie in [0, 1]";
  if (!(s.zipf_s >= 0.0)) return "--zipf-s must be non-negative";
  if (s.zipf_n == 0 || s.zipf_n > kMaxUserKey) return "--zipf-n out of range";
  if (s.kind == ScenarioKind::deletion_window && s.window == 0) return "--window must be positive";
  if (s.variant == Variant::sequential && s.threads != 1) return "the sequential variant runs with --threads 1";
  if (s.variant == Variant::folklore &&
      (s.kind == ScenarioKind::insert_grow || s.kind == ScenarioKind::deletion_window)) {
    return "the folklore table can't grow or clean up; pick a growing variant";
  }
  return {};
}

double RunResult::mean_wall_ms() const {
  if (reps.empty()) return 0;
  double sum = 0;
  for (const RepResult& r : reps) sum += r.wall_ms;
  return sum / static_cast<double>(reps.size());
}

double RunResult::mops() const {
  const double ms = mean_wall_ms();
  return ms > 0 ? static_cast<double>(scenario.ops) / (ms * 1000.0) : 0.0;
}

bool RunResult::oracle_pass() const {
  return std::all_of(reps.begin(), reps.end(), [](const RepResult& r) { return r.oracle_pass; });
}

RunResult run(const Scenario& scenario) {
  if (auto error = validate(scenario); !error.empty()) throw std::invalid_argument(error);
  const Inputs inputs = make_inputs(scenario);
  RunResult result;
  result.scenario = scenario;
  result.provenance = inputs.provenance;
  bool pinned = scenario.pin;
  for (unsigned r = 1; r <= scenario.reps; ++r) {
    RepResult rep = with_store(scenario, inputs, [&](auto& store) { return run_rep(scenario, inputs, store, pinned); });
    rep.rep = r;
    result.reps.push_back(std::move(rep));
  }
  result.pinned = pinned;
  return result;
}

}  // namespace lpmap::bench
