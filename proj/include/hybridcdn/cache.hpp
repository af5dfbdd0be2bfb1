#pragma once

#include <cstddef>
#include <cstdint>
#include <list>
#include <optional>
#include <unordered_map>
#include <vector>

#include "hybridcdn/media.hpp"

namespace hybridcdn {

enum class CacheRole { Cdn, Vts, Peer };
enum class CapacityMode { SegmentCount, DatasetFraction };

struct CacheConfig {
  CapacityMode capacity_mode = CapacityMode::SegmentCount;
  double capacity_value = 5;  // segment count, or fraction in (0, 1]
  CacheRole role = CacheRole::Peer;
};

/// Segment slots in the live dataset: window length x channels x rungs.
std::size_t live_dataset_segments(std::int64_t window_segments, int channel_count, int rung_count);

/// Resolves a config to a slot count. Fraction mode needs the dataset size and
/// rounds down. Throws ConfigError when the result would be zero or the
/// config is out of range.
std::size_t resolve_capacity(const CacheConfig& config, std::optional<std::size_t> dataset_segments);

struct CacheSnapshot {
  std::vector<SegmentRef> entries;  // most recent first
  std::size_t capacity = 0;
  double fill_ratio = 0.0;
};

/// Fixed-capacity LRU set of segments. Single owner; not thread-safe.
class LruCache {
 public:
  explicit LruCache(std::size_t capacity_segments);

  /// Hit refreshes recency.
  bool lookup(const SegmentRef& ref);
  bool contains(const SegmentRef& ref) const;

  /// Inserts (or refreshes) ref as most recent, returning what was evicted.
  std::vector<SegmentRef> insert(const SegmentRef& ref);
  bool erase(const SegmentRef& ref);

  /// Drops every entry with segment_index < first_live_segment.
  std::vector<SegmentRef> prune_older_than(std::int64_t first_live_segment);

  /// Lowest cached rung strictly above ref.rung_index for the same channel
  /// and segment, searching up to rung_count - 1.
  std::optional<int> lowest_rung_above(const SegmentRef& ref, int rung_count) const;

  CacheSnapshot snapshot() const;

  std::size_t size() const noexcept { return order_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return order_.empty(); }
  // Bumped on every membership change (not on recency touches).
  std::uint64_t version() const noexcept { return version_; }

 private:
  std::size_t capacity_;
  std::uint64_t version_ = 0;
  std::list<SegmentRef> order_;
  std::unordered_map<SegmentRef, std::list<SegmentRef>::iterator, SegmentRefHash> index_;
};

}  // namespace hybridcdn
