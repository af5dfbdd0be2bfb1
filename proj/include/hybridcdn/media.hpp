#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace hybridcdn {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits of one draw. Unlike
// std::uniform_real_distribution the result is identical across standard
// library implementations, which keeps traces portable.
double uniform01(Rng& rng);

// Exponential variate with the given mean, drawn by inversion.
double exponential(Rng& rng, double mean);

struct Representation {
  int rung_index = 0;
  std::int64_t bitrate_bps = 0;
  std::string resolution_label;

  friend bool operator==(const Representation&, const Representation&) = default;
};

using Ladder = std::vector<Representation>;

/// Addressable media unit: one segment of one channel at one rung.
struct SegmentRef {
  int channel_id = 0;
  std::int64_t segment_index = 0;
  int rung_index = 0;

  friend auto operator<=>(const SegmentRef&, const SegmentRef&) = default;
};

struct SegmentRefHash {
  std::size_t operator()(const SegmentRef& ref) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(ref.segment_index) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(ref.channel_id) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(ref.rung_index) + 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

/// The five-rung ladder used by every channel: 89k/320p, 262k/480p,
/// 791k/720p, 2484k/1080p, 4219k/1080p.
Ladder default_ladder();

// Throws std::invalid_argument unless the ladder is non-empty, rung indices
// are 0..n-1 in order, and bitrates are strictly increasing.
void validate_ladder(const Ladder& ladder);

/// weight(k) = k^-alpha / sum_{i=1..n} i^-alpha for ranks k = 1..n.
std::vector<double> zipf_weights(std::size_t n, double alpha);

struct ChannelCatalog {
  int channel_count = 5;
  double segment_duration_s = 2.0;
  double zipf_alpha = 0.7;
  std::vector<double> popularity;  // index = channel_id = popularity rank - 1

  static ChannelCatalog make(int channel_count, double segment_duration_s, double zipf_alpha);
  void validate() const;
};

/// Draws a channel id according to catalog.popularity. Consumes exactly one
/// value from rng.
int sample_channel(Rng& rng, const ChannelCatalog& catalog);

/// bitrate * duration / 8, rounded to the nearest byte.
std::int64_t segment_bytes(const Representation& rep, double duration_s);

}  // namespace hybridcdn
