#include <lpmap/grow_table.hpp>
#include <lpmap/sequential_table.hpp>
#include <lpmap/workload.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace {

using namespace lpmap;
using Grow = GrowTable<>;

GrowConfig variant(const std::string& name, unsigned threads) {
  GrowConfig config = *GrowConfig::for_variant(name);
  config.threads = threads;
  config.pool_size = 2;
  config.pin_pool = false;
  return config;
}

class EveryVariant : public ::testing::TestWithParam<std::string> {};

INSTANTIATE_TEST_SUITE_P(GrowTable, EveryVariant, ::testing::Values("uaGrow", "usGrow", "paGrow", "psGrow"),
                         [](const auto& info) { return info.param; });

TEST_P(EveryVariant, InitialCapacityFollowsExpectedSize) {
  Grow small(1000, variant(GetParam(), 1));
  EXPECT_EQ(small.capacity(), capacity_for(1000));
  Grow large(100'000, variant(GetParam(), 1));
  EXPECT_EQ(large.capacity(), capacity_for(100'000));
  EXPECT_EQ(large.version(), 1u);
  EXPECT_EQ(large.live_versions(), 1u);
}

TEST_P(EveryVariant, InsertFindRoundTripAcrossGrowth) {
  Grow table(0, variant(GetParam(), 1));
  auto h = table.get_handle();
  constexpr std::uint64_t n = 100'000;
  for (std::uint64_t k = 1; k <= n; ++k) ASSERT_TRUE(h.insert(k, k * 3));
  EXPECT_GT(table.migrations(), 4u);
  for (std::uint64_t k = 1; k <= n; ++k) ASSERT_EQ(h.find(k), k * 3) << k;
  EXPECT_FALSE(h.find(n + 1));
  EXPECT_FALSE(h.insert(7, 0));
  EXPECT_EQ(h.find(7), 21u);
  EXPECT_EQ(table.exact_size_quiescent(), static_cast<std::int64_t>(n));
  EXPECT_GE(table.capacity(), 2 * n);
}

TEST_P(EveryVariant, ConcurrentInsertersLoseNothing) {
  constexpr unsigned p = 4;
  constexpr std::uint64_t per_thread = 40'000;
  Grow table(0, variant(GetParam(), p));
  {
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < p; ++t) {
      threads.emplace_back([&, t] {
        auto h = table.get_handle();
        for (std::uint64_t i = 0; i < per_thread; ++i) {
          const std::uint64_t k = 1 + i * p + t;
          if (!h.insert(k, k)) ADD_FAILURE() << "duplicate " << k;
        }
      });
    }
    for (auto& th : threads) th.join();
  }
  auto h = table.get_handle();
  for (std::uint64_t k = 1; k <= per_thread * p; ++k) ASSERT_EQ(h.find(k), k) << k;
  EXPECT_EQ(table.exact_size_quiescent(), static_cast<std::int64_t>(per_thread * p));
}

TEST_P(EveryVariant, PrefilledKeysNeverDisappearDuringGrowth) {
  constexpr std::uint64_t prefill = 2000;
  Grow table(0, variant(GetParam(), 3));
  {
    auto h = table.get_handle();
    for (std::uint64_t k = 1; k <= prefill; ++k) h.insert(k, k);
  }
  std::atomic<bool> done{false};
  std::atomic<std::uint64_t> absent{0};
  std::vector<std::thread> readers;
  for (int r = 0; r < 2; ++r) {
    readers.emplace_back([&, r] {
      auto h = table.get_handle();
      std::uint64_t k = 1 + r;
      while (!done.load(std::memory_order_acquire)) {
        if (h.find(k) != k) ++absent;
        k = k % prefill + 1;
      }
    });
  }
  {
    auto h = table.get_handle();
    for (std::uint64_t k = prefill + 1; k <= 60'000; ++k) h.insert(k, k);
  }
  done = true;
  for (auto& th : readers) th.join();
  EXPECT_GT(table.migrations(), 2u);
  EXPECT_EQ(absent.load(), 0u);
}

TEST_P(EveryVariant, ZipfAggregationMatchesHistogram) {
  constexpr unsigned p = 4;
  const KeySequence seq = gen_zipf(80'000, ZipfSpec{10'000, 1.0, 3});
  std::unordered_map<std::uint64_t, std::uint64_t> histogram;
  for (std::uint64_t k : seq.keys) ++histogram[k];
  Grow table(0, variant(GetParam(), p));
  {
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < p; ++t) {
      threads.emplace_back([&, t] {
        auto h = table.get_handle();
        for (std::size_t i = t; i < seq.keys.size(); i += p) h.insert_or_update(seq.keys[i], 1, Add{});
      });
    }
    for (auto& th : threads) th.join();
  }
  std::size_t seen = 0;
  table.for_each([&](std::uint64_t k, std::uint64_t v) {
    ++seen;
    EXPECT_EQ(v, histogram[k]) << "key " << k;
  });
  EXPECT_EQ(seen, histogram.size());
  EXPECT_EQ(table.exact_size_quiescent(), static_cast<std::int64_t>(histogram.size()));
}

TEST_P(EveryVariant, RandomOperationsMatchReferenceMap) {
  Grow table(0, variant(GetParam(), 1));
  auto h = table.get_handle();
  std::map<std::uint64_t, std::uint64_t> reference;
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200'000; ++i) {
    const std::uint64_t k = 1 + rng() % 20'000;
    const std::uint64_t v = rng() % 1000;
    switch (rng() % 5) {
      case 0:
        ASSERT_EQ(h.insert(k, v), reference.emplace(k, v).second);
        break;
      case 1: {
        const auto it = reference.find(k);
        ASSERT_EQ(h.update(k, v), it != reference.end());
        if (it != reference.end()) it->second = v;
        break;
      }
      case 2: {
        const bool fresh = !reference.contains(k);
        ASSERT_EQ(h.insert_or_update(k, v, Add{}), fresh);
        reference[k] += v;
        break;
      }
      case 3: {
        const auto it = reference.find(k);
        ASSERT_EQ(h.find(k), it == reference.end() ? std::nullopt : std::optional(it->second));
        break;
      }
      default:
        ASSERT_EQ(h.erase(k), reference.erase(k) == 1);
    }
  }
  EXPECT_GT(table.migrations(), 0u);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> expected(reference.begin(), reference.end());
  EXPECT_EQ(oracle::contents(table), expected);
  EXPECT_EQ(table.exact_size_quiescent(), static_cast<std::int64_t>(reference.size()));
}

TEST_P(EveryVariant, DisjointWritersAgreeWithTheirOwnReferences) {
  constexpr unsigned p = 4;
  Grow table(0, variant(GetParam(), p));
  std::vector<std::map<std::uint64_t, std::uint64_t>> references(p);
  {
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < p; ++t) {
      threads.emplace_back([&, t] {
        auto h = table.get_handle();
        auto& reference = references[t];
        std::mt19937_64 rng(100 + t);
        for (int i = 0; i < 60'000; ++i) {
          const std::uint64_t k = 1 + (rng() % 5000) * p + t;
          const std::uint64_t v = rng() % 1000;
          bool ok = true;
          switch (rng() % 4) {
            case 0:
            case 1:
              ok = h.insert(k, v) == reference.emplace(k, v).second;
              break;
            case 2: {
              const auto it = reference.find(k);
              ok = h.find(k) == (it == reference.end() ? std::nullopt : std::optional(it->second));
              break;
            }
            default:
              ok = h.erase(k) == (reference.erase(k) == 1);
          }
          if (!ok) {
            ADD_FAILURE() << "thread " << t << " op " << i << " key " << k;
            return;
          }
        }
      });
    }
    for (auto& th : threads) th.join();
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> expected;
  for (const auto& r : references) expected.insert(expected.end(), r.begin(), r.end());
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(oracle::contents(table), expected);
  EXPECT_EQ(table.exact_size_quiescent(), static_cast<std::int64_t>(expected.size()));
}

TEST_P(EveryVariant, ValuesOfAKeyNeverGoBackwards) {
  // one writer overwrites key k with increasing values while a filler forces
  // migrations; a reader must observe a non-decreasing sequence
  constexpr std::uint64_t key = 42;
  Grow table(0, variant(GetParam(), 3));
  {
    auto h = table.get_handle();
    h.insert(key, 0);
  }
  std::atomic<bool> done{false};
  std::atomic<bool> backwards{false};
  std::thread writer([&] {
    auto h = table.get_handle();
    for (std::uint64_t v = 1; !done.load(std::memory_order_acquire); ++v) h.update(key, v);
  });
  std::thread reader([&] {
    auto h = table.get_handle();
    std::uint64_t last = 0;
    while (!done.load(std::memory_order_acquire)) {
      const auto v = h.find(key);
      if (!v || *v < last) backwards = true;
      if (v) last = *v;
    }
  });
  {
    auto h = table.get_handle();
    for (std::uint64_t k = 1000; k < 60'000; ++k) h.insert(k, k);
  }
  done = true;
  writer.join();
  reader.join();
  EXPECT_GT(table.migrations(), 2u);
  EXPECT_FALSE(backwards.load());
}

TEST_P(EveryVariant, OldVersionsAreReclaimed) {
  Grow table(0, variant(GetParam(), 1));
  {
    auto h = table.get_handle();
    for (std::uint64_t k = 1; k <= 20'000; ++k) h.insert(k, k);
    h.find(1);  // moves the handle onto the published version
  }
  ASSERT_GT(table.migrations(), 0u);
  // a pool worker may still be returning from the last job
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
  while (table.live_versions() != 1 && std::chrono::steady_clock::now() < deadline) std::this_thread::yield();
  EXPECT_EQ(table.live_versions(), 1u);
}

TEST_P(EveryVariant, DeletionChurnShrinksTheTable) {
  Grow table(0, variant(GetParam(), 1));
  auto h = table.get_handle();
  for (std::uint64_t k = 1; k <= 20'000; ++k) h.insert(k, k);
  const std::size_t grown = table.capacity();
  ASSERT_GE(grown, 32768u);
  for (std::uint64_t k = 101; k <= 20'000; ++k) ASSERT_TRUE(h.erase(k));
  // insert-erase pairs raise I without adding live elements
  const std::size_t before = table.migrations();
  std::uint64_t k = 1'000'000;
  while (table.migrations() == before) {
    h.insert(k, 0);
    h.erase(k);
    ++k;
  }
  EXPECT_EQ(table.capacity(), 4096u);
  for (std::uint64_t j = 1; j <= 100; ++j) ASSERT_EQ(h.find(j), j);
  EXPECT_EQ(table.exact_size_quiescent(), 100);
}

TEST(GrowTableCounters, MigrationResetsCountsToLiveElements) {
  GrowConfig config = variant("uaGrow", 1);
  Grow table(0, config);
  auto h = table.get_handle();
  std::uint64_t k = 1;
  for (; k <= 1000; ++k) h.insert(k, k);
  for (std::uint64_t j = 1; j <= 300; ++j) h.erase(j);
  EXPECT_EQ(table.insertion_count(), 1000);
  EXPECT_EQ(table.deletion_count(), 300);
  while (table.migrations() == 0) h.insert(k++, 0);
  const std::int64_t live = static_cast<std::int64_t>(k - 1 - 300);
  EXPECT_EQ(table.insertion_count(), live);
  EXPECT_EQ(table.deletion_count(), 0);
}

TEST(GrowTableCounters, HandleDestructionFlushesTallies) {
  GrowConfig config = variant("uaGrow", 8);
  config.thresholds = ThresholdRange{100, 100};
  Grow table(0, config);
  {
    auto h = table.get_handle();
    for (std::uint64_t k = 1; k <= 50; ++k) h.insert(k, k);
    EXPECT_EQ(table.insertion_count(), 0);
    EXPECT_EQ(table.exact_size_quiescent(), 50);
    const SizeEstimate e = table.estimate_size();
    EXPECT_LE(e.lower, 50u);
    EXPECT_GE(e.upper, 50u);
  }
  EXPECT_EQ(table.insertion_count(), 50);
}

TEST(GrowTableCounters, EstimateBracketsSizeAfterConcurrentWork) {
  constexpr unsigned p = 4;
  Grow table(0, variant("uaGrow", p));
  std::vector<Grow::Handle> handles;
  for (unsigned t = 0; t < p; ++t) handles.push_back(table.get_handle());
  {
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < p; ++t) {
      threads.emplace_back([&, t] {
        for (std::uint64_t i = 0; i < 10'000; ++i) handles[t].insert(1 + i * p + t, i);
        for (std::uint64_t i = 0; i < 1000; ++i) handles[t].erase(1 + i * p + t);
      });
    }
    for (auto& th : threads) th.join();
  }
  for (auto& h : handles) h.find(1);  // settle onto the published version
  const std::uint64_t size = p * 9000;
  EXPECT_EQ(table.exact_size_quiescent(), static_cast<std::int64_t>(size));
  const SizeEstimate e = table.estimate_size();
  EXPECT_LE(e.lower, size);
  EXPECT_GE(e.upper, size);
}

TEST(GrowTableBuild, KeepsLastValueOfDuplicates) {
  const std::vector<KeyValue> pairs{{5, 1}, {9, 2}, {5, 3}, {7, 4}, {9, 5}, {5, 6}};
  auto table = Grow::build_from(pairs, variant("uaGrow", 2), 2);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> expected{{5, 6}, {7, 4}, {9, 5}};
  EXPECT_EQ(oracle::contents(*table), expected);
  EXPECT_EQ(table->exact_size_quiescent(), 3);
}

TEST(GrowTableBuild, EmptyInput) {
  auto table = Grow::build_from({}, variant("uaGrow", 1), 4);
  EXPECT_EQ(table->capacity(), kMinCapacity);
  EXPECT_EQ(table->exact_size_quiescent(), 0);
}

TEST(GrowTableBuild, LargeParallelBuild) {
  std::vector<KeyValue> pairs;
  const KeySequence keys = gen_uniform(100'000, 9, true);
  for (std::uint64_t k : keys.keys) pairs.push_back({k, k ^ 0xff});
  auto table = Grow::build_from(pairs, variant("uaGrow", 4), 4);
  EXPECT_EQ(table->capacity(), capacity_for(100'000));
  EXPECT_EQ(table->exact_size_quiescent(), 100'000);
  EXPECT_EQ(table->insertion_count(), 100'000);
  auto h = table->get_handle();
  for (const KeyValue& kv : pairs) ASSERT_EQ(h.find(kv.key), kv.value);
}

TEST(GrowTableSequential, SingleThreadMatchesSequentialTable) {
  GrowConfig config = variant("uaGrow", 1);
  Grow table(0, config);
  SequentialTable<> sequential(kMinCapacity, config);
  auto h = table.get_handle();
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100'000; ++i) {
    const std::uint64_t k = 1 + rng() % 30'000;
    if (rng() % 4 == 0) {
      ASSERT_EQ(h.erase(k), sequential.erase(k));
    } else {
      ASSERT_EQ(h.insert(k, i), sequential.insert(k, i));
    }
    ASSERT_EQ(table.capacity(), sequential.capacity()) << "op " << i;
    ASSERT_EQ(table.migrations(), sequential.migrations()) << "op " << i;
  }
  EXPECT_EQ(oracle::contents(table), oracle::contents(sequential));
}

TEST(SyncGateTest, RaiseWaitsForBusyOperation) {
  HandleRegistry registry;
  SyncGate gate(registry);
  HandleSlot& worker_slot = registry.acquire();
  std::atomic<bool> entered{false};
  std::atomic<bool> left{false};
  std::thread worker([&] {
    ASSERT_TRUE(gate.try_enter(worker_slot));
    entered = true;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    left = true;
    gate.leave(worker_slot);
  });
  while (!entered) std::this_thread::yield();
  ASSERT_TRUE(gate.raise());
  EXPECT_FALSE(gate.raise());
  gate.wait_for_quiescence();
  EXPECT_TRUE(left.load());
  worker.join();
  HandleSlot& late = registry.acquire();
  EXPECT_FALSE(gate.try_enter(late));
  EXPECT_FALSE(late.busy.load());
  gate.lower();
  EXPECT_TRUE(gate.try_enter(late));
  gate.leave(late);
}

TEST(PoolStrategy, ManySmallMigrations) {
  for (const char* name : {"paGrow", "psGrow"}) {
    GrowConfig config = variant(name, 2);
    config.min_capacity = 64;
    config.block_size = 64;
    Grow table(0, config);
    auto h = table.get_handle();
    std::mt19937_64 rng(3);
    std::map<std::uint64_t, std::uint64_t> reference;
    for (int i = 0; i < 30'000; ++i) {
      const std::uint64_t k = 1 + rng() % 200;
      if (rng() % 2) {
        ASSERT_EQ(h.insert(k, i), reference.emplace(k, i).second);
      } else {
        ASSERT_EQ(h.erase(k), reference.erase(k) == 1);
      }
    }
    EXPECT_GT(table.migrations(), 50u) << name;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> expected(reference.begin(), reference.end());
    EXPECT_EQ(oracle::contents(table), expected) << name;
  }
}

}  // namespace
