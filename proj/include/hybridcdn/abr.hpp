#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hybridcdn/media.hpp"

namespace hybridcdn {

enum class AbrKind { Bola, HybridProxy };

std::string_view to_string(AbrKind kind);
AbrKind parse_abr(std::string_view name);  // "bola" | "hybrid-proxy"

struct PlayerState {
  double buffer_s = 0.0;
  double segment_duration_s = 2.0;
  std::optional<int> last_rung;
  double throughput_est_bps = 0.0;  // 0 until the first download completes
  bool stalled = false;

  double buffer_segments() const { return buffer_s / segment_duration_s; }
};

/// Harmonic mean of the throughput of the last `window` downloads.
class ThroughputEstimator {
 public:
  explicit ThroughputEstimator(std::size_t window = 5);
  void add(double bits, double seconds);
  double estimate_bps() const;  // 0 when empty
  std::size_t samples() const noexcept { return samples_.size(); }

 private:
  std::size_t window_;
  std::deque<double> samples_;
};

/// BOLA-BASIC control parameters. Buffer is measured in segments.
struct BolaParams {
  double v = 0.93;
  double gamma_p = 5.0;
};

/// u_m = ln(S_m / S_0).
std::vector<double> bola_utilities(std::span<const double> segment_sizes);

/// argmax_m (V (u_m + gamma_p) - Q) / S_m over rungs, ties to the lower rung.
int bola_choose_sizes(double buffer_segments, std::span<const double> segment_sizes, const BolaParams& params);
int bola_choose(const PlayerState& state, const Ladder& ladder, const BolaParams& params);

/// Throughput-buffer stand-in for a hybrid ABR: highest rung whose bitrate
/// fits under safety x throughput, capped at one rung above BOLA's choice,
/// then demoted one rung while the buffer holds less than two segments.
int hybrid_choose(const PlayerState& state, const Ladder& ladder, double safety,
                  const BolaParams& params = {});

}  // namespace hybridcdn
