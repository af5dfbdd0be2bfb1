#include "hybridcdn/cache.hpp"

#include <cmath>

#include "hybridcdn/errors.hpp"

namespace hybridcdn {

std::size_t live_dataset_segments(std::int64_t window_segments, int channel_count, int rung_count) {
  if (window_segments < 1 || channel_count < 1 || rung_count < 1)
    throw ConfigError("live dataset dimensions must all be >= 1");
  return static_cast<std::size_t>(window_segments) * static_cast<std::size_t>(channel_count) *
         static_cast<std::size_t>(rung_count);
}

std::size_t resolve_capacity(const CacheConfig& config, std::optional<std::size_t> dataset_segments) {
  std::size_t slots = 0;
  if (config.capacity_mode == CapacityMode::SegmentCount) {
    if (config.capacity_value < 0 || config.capacity_value != std::floor(config.capacity_value))
      throw ConfigError("segment-count capacity must be a non-negative integer");
    slots = static_cast<std::size_t>(config.capacity_value);
  } else {
    if (!(config.capacity_value > 0.0 && config.capacity_value <= 1.0))
      throw ConfigError("dataset-fraction capacity must be in (0, 1]");
    if (!dataset_segments) throw ConfigError("dataset-fraction capacity needs a known dataset size");
    slots = static_cast<std::size_t>(std::floor(config.capacity_value * static_cast<double>(*dataset_segments)));
  }
  if (slots == 0) throw ConfigError("cache capacity resolves to zero segments");
  return slots;
}

LruCache::LruCache(std::size_t capacity_segments) : capacity_(capacity_segments) {
  if (capacity_ == 0) throw ConfigError("cache capacity must be >= 1 segment");
  index_.reserve(capacity_ + 1);
}

bool LruCache::lookup(const SegmentRef& ref) {
  auto it = index_.find(ref);
  if (it == index_.end()) return false;
  order_.splice(order_.begin(), order_, it->second);
  return true;
}

bool LruCache::contains(const SegmentRef& ref) const { return index_.count(ref) != 0; }

std::vector<SegmentRef> LruCache::insert(const SegmentRef& ref) {
  std::vector<SegmentRef> evicted;
  if (lookup(ref)) return evicted;
  order_.push_front(ref);
  index_.emplace(ref, order_.begin());
  while (order_.size() > capacity_) {
    evicted.push_back(order_.back());
    index_.erase(order_.back());
    order_.pop_back();
  }
  ++version_;
  return evicted;
}

bool LruCache::erase(const SegmentRef& ref) {
  auto it = index_.find(ref);
  if (it == index_.end()) return false;
  order_.erase(it->second);
  index_.erase(it);
  ++version_;
  return true;
}

std::vector<SegmentRef> LruCache::prune_older_than(std::int64_t first_live_segment) {
  std::vector<SegmentRef> pruned;
  for (auto it = order_.begin(); it != order_.end();) {
    if (it->segment_index < first_live_segment) {
      pruned.push_back(*it);
      index_.erase(*it);
      it = order_.erase(it);
    } else {
      ++it;
    }
  }
  if (!pruned.empty()) ++version_;
  return pruned;
}

std::optional<int> LruCache::lowest_rung_above(const SegmentRef& ref, int rung_count) const {
  SegmentRef probe = ref;
  for (int r = ref.rung_index + 1; r < rung_count; ++r) {
    probe.rung_index = r;
    if (contains(probe)) return r;
  }
  return std::nullopt;
}

CacheSnapshot LruCache::snapshot() const {
  CacheSnapshot snap;
  snap.entries.assign(order_.begin(), order_.end());
  snap.capacity = capacity_;
  snap.fill_ratio = static_cast<double>(order_.size()) / static_cast<double>(capacity_);
  return snap;
}

}  // namespace hybridcdn
