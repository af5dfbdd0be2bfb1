#include <gtest/gtest.h>

#include <random>

#include "hybridcdn/cache.hpp"
#include "hybridcdn/errors.hpp"
#include "oracles/lru_oracle.hpp"

using namespace hybridcdn;

namespace {
SegmentRef seg(std::int64_t i, int rung = 0, int ch = 0) { return {ch, i, rung}; }
}  // namespace

TEST(Lru, EmptyMisses) {
  LruCache c(4);
  EXPECT_FALSE(c.lookup(seg(1)));
}

TEST(Lru, InsertThenHit) {
  LruCache c(4);
  c.insert(seg(1));
  EXPECT_TRUE(c.lookup(seg(1)));
}

TEST(Lru, LookupRefreshesRecency) {
  LruCache c(2);
  c.insert(seg(1));
  c.insert(seg(2));
  EXPECT_TRUE(c.lookup(seg(1)));
  const auto evicted = c.insert(seg(3));
  ASSERT_EQ(evicted.size(), 1u);
  EXPECT_EQ(evicted[0], seg(2));
  EXPECT_TRUE(c.contains(seg(1)));
}

TEST(Lru, CapacityOneEvictsPrevious) {
  LruCache c(1);
  c.insert(seg(1));
  const auto evicted = c.insert(seg(2));
  ASSERT_EQ(evicted.size(), 1u);
  EXPECT_EQ(evicted[0], seg(1));
}

TEST(Lru, ReinsertDoesNotEvict) {
  LruCache c(2);
  c.insert(seg(1));
  c.insert(seg(2));
  EXPECT_TRUE(c.insert(seg(1)).empty());
  EXPECT_EQ(c.snapshot().entries.front(), seg(1));
}

TEST(Lru, ZeroCapacityIsConfigError) { EXPECT_THROW(LruCache(0), ConfigError); }

TEST(Lru, SnapshotFillRatioAndImmutability) {
  LruCache c(5);
  auto empty = c.snapshot();
  EXPECT_TRUE(empty.entries.empty());
  EXPECT_DOUBLE_EQ(empty.fill_ratio, 0.0);
  for (int i = 0; i < 5; ++i) c.insert(seg(i));
  auto full = c.snapshot();
  EXPECT_DOUBLE_EQ(full.fill_ratio, 1.0);
  c.insert(seg(9));
  EXPECT_EQ(full.entries.size(), 5u);
  EXPECT_EQ(full.entries.front(), seg(4));
}

TEST(Lru, PruneDropsOnlyOldSegments) {
  LruCache c(10);
  for (int i = 0; i < 6; ++i) c.insert(seg(i));
  const auto dropped = c.prune_older_than(3);
  EXPECT_EQ(dropped.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_FALSE(c.contains(seg(i)));
  for (int i = 3; i < 6; ++i) EXPECT_TRUE(c.contains(seg(i)));
}

TEST(Lru, LowestRungAbove) {
  LruCache c(10);
  c.insert(seg(5, 4));
  c.insert(seg(5, 2));
  c.insert(seg(6, 1));
  EXPECT_EQ(c.lowest_rung_above(seg(5, 0), 5), 2);
  EXPECT_EQ(c.lowest_rung_above(seg(5, 2), 5), 4);
  EXPECT_FALSE(c.lowest_rung_above(seg(5, 4), 5).has_value());
  EXPECT_FALSE(c.lowest_rung_above(seg(6, 1), 5).has_value());
}

TEST(Lru, VersionBumpsOnMembershipChangeOnly) {
  LruCache c(3);
  const auto v0 = c.version();
  c.insert(seg(1));
  const auto v1 = c.version();
  EXPECT_NE(v0, v1);
  c.lookup(seg(1));
  EXPECT_EQ(c.version(), v1);
}

TEST(Capacity, ResolvesLiveWindowFractions) {
  const std::size_t dataset = live_dataset_segments(150, 5, 5);
  EXPECT_EQ(dataset, 3750u);
  EXPECT_EQ(resolve_capacity({CapacityMode::DatasetFraction, 0.40, CacheRole::Cdn}, dataset), 1500u);
  EXPECT_EQ(resolve_capacity({CapacityMode::DatasetFraction, 0.05, CacheRole::Vts}, dataset), 187u);
  EXPECT_EQ(resolve_capacity({CapacityMode::SegmentCount, 5, CacheRole::Peer}, std::nullopt), 5u);
}

TEST(Capacity, Errors) {
  EXPECT_THROW(resolve_capacity({CapacityMode::DatasetFraction, 0.4, CacheRole::Cdn}, std::nullopt), ConfigError);
  EXPECT_THROW(resolve_capacity({CapacityMode::DatasetFraction, 1e-6, CacheRole::Cdn}, 100), ConfigError);
  EXPECT_THROW(resolve_capacity({CapacityMode::DatasetFraction, 1.5, CacheRole::Cdn}, 100), ConfigError);
  EXPECT_THROW(resolve_capacity({CapacityMode::SegmentCount, 0, CacheRole::Peer}, std::nullopt), ConfigError);
}

TEST(LruProperty, MatchesListOracleAndNeverExceedsCapacity) {
  std::mt19937_64 rng(2024);
  for (int trace = 0; trace < 20; ++trace) {
    const std::size_t cap = 1 + rng() % 20;
    LruCache cache(cap);
    oracle::ListLru ref(cap);
    for (int op = 0; op < 2000; ++op) {
      const SegmentRef s = seg(static_cast<std::int64_t>(rng() % 40), static_cast<int>(rng() % 3));
      if (rng() % 2) {
        ASSERT_EQ(cache.lookup(s), ref.lookup(s));
      } else {
        ASSERT_EQ(cache.insert(s), ref.insert(s));
      }
      ASSERT_LE(cache.size(), cap);
    }
    ASSERT_EQ(cache.snapshot().entries, ref.items());
  }
}

TEST(LruProperty, PruneNeverDropsLiveSegments) {
  std::mt19937_64 rng(99);
  LruCache cache(50);
  for (int op = 0; op < 5000; ++op) {
    cache.insert(seg(static_cast<std::int64_t>(rng() % 200)));
    if (op % 100 == 99) {
      const std::int64_t first = static_cast<std::int64_t>(rng() % 200);
      const auto before = cache.snapshot().entries;
      cache.prune_older_than(first);
      for (const auto& s : before) EXPECT_EQ(cache.contains(s), s.segment_index >= first);
    }
  }
}
