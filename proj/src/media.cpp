#include "hybridcdn/media.hpp"

#include <cmath>
#include <stdexcept>

namespace hybridcdn {

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double exponential(Rng& rng, double mean) {
  return -mean * std::log1p(-uniform01(rng));
}

Ladder default_ladder() {
  return {
      {0, 89'000, "320p"},
      {1, 262'000, "480p"},
      {2, 791'000, "720p"},
      {3, 2'484'000, "1080p"},
      {4, 4'219'000, "1080p"},
  };
}

void validate_ladder(const Ladder& ladder) {
  if (ladder.empty()) throw std::invalid_argument("ladder is empty");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (ladder[i].rung_index != static_cast<int>(i))
      throw std::invalid_argument("ladder rung indices must be 0..n-1 in order");
    if (ladder[i].bitrate_bps <= 0) throw std::invalid_argument("ladder bitrate must be positive");
    if (i > 0 && ladder[i].bitrate_bps <= ladder[i - 1].bitrate_bps)
      throw std::invalid_argument("ladder bitrates must be strictly increasing");
  }
}

std::vector<double> zipf_weights(std::size_t n, double alpha) {
  if (n == 0) throw std::invalid_argument("zipf_weights: n must be >= 1");
  if (!(alpha >= 0.0)) throw std::invalid_argument("zipf_weights: alpha must be >= 0");
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    w[k - 1] = std::pow(static_cast<double>(k), -alpha);
    total += w[k - 1];
  }
  for (double& x : w) x /= total;
  return w;
}

ChannelCatalog ChannelCatalog::make(int channel_count, double segment_duration_s, double zipf_alpha) {
  if (channel_count < 1) throw std::invalid_argument("channel_count must be >= 1");
  ChannelCatalog c;
  c.channel_count = channel_count;
  c.segment_duration_s = segment_duration_s;
  c.zipf_alpha = zipf_alpha;
  c.popularity = zipf_weights(static_cast<std::size_t>(channel_count), zipf_alpha);
  c.validate();
  return c;
}

void ChannelCatalog::validate() const {
  if (channel_count < 1 || popularity.size() != static_cast<std::size_t>(channel_count))
    throw std::invalid_argument("catalog popularity must have one entry per channel");
  if (!(segment_duration_s > 0.0)) throw std::invalid_argument("segment duration must be positive");
  double total = 0.0;
  for (std::size_t i = 0; i < popularity.size(); ++i) {
    if (popularity[i] < 0.0) throw std::invalid_argument("negative channel popularity");
    if (i > 0 && popularity[i] > popularity[i - 1])
      throw std::invalid_argument("channel popularity must be non-increasing in channel id");
    total += popularity[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("channel popularity must sum to 1");
}

int sample_channel(Rng& rng, const ChannelCatalog& catalog) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < catalog.popularity.size(); ++i) {
    cumulative += catalog.popularity[i];
    if (u < cumulative) return static_cast<int>(i);
  }
  return catalog.channel_count - 1;
}

std::int64_t segment_bytes(const Representation& rep, double duration_s) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("segment_bytes: duration must be positive");
  return std::llround(static_cast<double>(rep.bitrate_bps) * duration_s / 8.0);
}

}  // namespace hybridcdn
