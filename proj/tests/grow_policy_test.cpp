#include <lpmap/grow_policy.hpp>

#include <gtest/gtest.h>

#include <bit>
#include <random>

namespace {

using namespace lpmap;

TEST(CheckTrigger, GrowsAtSixtyPercent) {
  const GrowConfig config;
  // 2458 >= 0.6 * 4096 = 2457.6
  const auto decision = check_trigger(2458, 0, 4096, config);
  ASSERT_TRUE(decision);
  EXPECT_EQ(decision->capacity, 8192u);
  EXPECT_EQ(decision->kind, MigrationKind::grow);
  EXPECT_FALSE(check_trigger(2457, 0, 4096, config));
}

TEST(CheckTrigger, NoTriggerBelowAlpha) {
  EXPECT_FALSE(check_trigger(100, 0, 4096, GrowConfig{}));
  EXPECT_FALSE(check_trigger(0, 0, 4096, GrowConfig{}));
}

TEST(CheckTrigger, ShrinkTargetHonoursMinimumCapacity) {
  // I = 4916, D = 4000 at c = 8192: 2 * 916 = 1832 rounds up to 2048, which
  // the default minimum capacity raises to 4096
  const auto clamped = check_trigger(4916, 4000, 8192, GrowConfig{});
  ASSERT_TRUE(clamped);
  EXPECT_EQ(clamped->capacity, 4096u);
  EXPECT_EQ(clamped->kind, MigrationKind::shrink);

  GrowConfig small;
  small.min_capacity = 1024;
  const auto unclamped = check_trigger(4916, 4000, 8192, small);
  ASSERT_TRUE(unclamped);
  EXPECT_EQ(unclamped->capacity, 2048u);
  EXPECT_EQ(unclamped->kind, MigrationKind::shrink);
}

TEST(CheckTrigger, SameSizeCleanup) {
  // many tombstones, live count still needs the current size
  const auto d = check_trigger(4916, 1000, 8192, GrowConfig{});
  ASSERT_TRUE(d);
  EXPECT_EQ(d->capacity, 8192u);
  EXPECT_EQ(d->kind, MigrationKind::cleanup);
}

TEST(CheckTrigger, GrowthRespectsGamma) {
  GrowConfig config;
  config.gamma = 4;
  const auto d = check_trigger(2458, 0, 4096, config);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->capacity, 16384u);
}

TEST(CheckTrigger, OverflowFiresBelowAlphaAndNeverShrinks) {
  const auto d = check_trigger(10, 5, 8192, GrowConfig{}, true);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->capacity, 8192u);
  EXPECT_EQ(d->kind, MigrationKind::cleanup);
}

TEST(CheckTrigger, NewCapacityIsPowerOfTwoHoldingTwiceTheLiveCount) {
  std::mt19937_64 rng(1);
  const GrowConfig config;
  for (int i = 0; i < 100000; ++i) {
    const std::size_t c = std::size_t{1} << (12 + rng() % 16);
    const auto insertions = static_cast<std::int64_t>(rng() % c);
    const auto deletions = static_cast<std::int64_t>(rng() % (insertions + 1));
    const auto d = check_trigger(insertions, deletions, c, config);
    ASSERT_EQ(d.has_value(), static_cast<double>(insertions) >= 0.6 * static_cast<double>(c));
    if (!d) continue;
    ASSERT_TRUE(std::has_single_bit(d->capacity));
    ASSERT_GE(d->capacity, static_cast<std::size_t>(2 * (insertions - deletions)));
    ASSERT_GE(d->capacity, kMinCapacity);
  }
}

TEST(GrowConfig, VariantNames) {
  for (const char* name : {"uaGrow", "usGrow", "paGrow", "psGrow"}) {
    const auto config = GrowConfig::for_variant(name);
    ASSERT_TRUE(config);
    EXPECT_EQ(config->variant_name(), name);
  }
  EXPECT_EQ(GrowConfig::for_variant("usGrow")->protocol, ConsistencyProtocol::synchronized);
  EXPECT_EQ(GrowConfig::for_variant("paGrow")->strategy, MigrationStrategy::pool);
  EXPECT_FALSE(GrowConfig::for_variant("folklore"));
}

TEST(GrowConfig, Defaults) {
  const GrowConfig config;
  EXPECT_DOUBLE_EQ(config.alpha, 0.6);
  EXPECT_EQ(config.gamma, 2u);
  EXPECT_EQ(config.block_size, 4096u);
  EXPECT_EQ(config.min_capacity, 4096u);
  EXPECT_GE(config.resolved_threads(), 1u);
}

}  // namespace
