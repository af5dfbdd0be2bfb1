#include "hybridcdn/abr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hybridcdn {

std::string_view to_string(AbrKind kind) { return kind == AbrKind::Bola ? "bola" : "hybrid-proxy"; }

AbrKind parse_abr(std::string_view name) {
  if (name == "bola") return AbrKind::Bola;
  if (name == "hybrid-proxy") return AbrKind::HybridProxy;
  throw std::invalid_argument("unknown abr '" + std::string(name) + "'");
}

ThroughputEstimator::ThroughputEstimator(std::size_t window) : window_(window) {
  if (window_ == 0) throw std::invalid_argument("throughput window must be >= 1");
}

void ThroughputEstimator::add(double bits, double seconds) {
  if (!(bits > 0.0) || !(seconds > 0.0)) return;
  samples_.push_back(bits / seconds);
  if (samples_.size() > window_) samples_.pop_front();
}

double ThroughputEstimator::estimate_bps() const {
  if (samples_.empty()) return 0.0;
  double inv = 0.0;
  for (double s : samples_) inv += 1.0 / s;
  return static_cast<double>(samples_.size()) / inv;
}

std::vector<double> bola_utilities(std::span<const double> sizes) {
  if (sizes.empty()) throw std::invalid_argument("bola: ladder is empty");
  std::vector<double> u(sizes.size());
  for (std::size_t m = 0; m < sizes.size(); ++m) u[m] = std::log(sizes[m] / sizes[0]);
  return u;
}

int bola_choose_sizes(double buffer_segments, std::span<const double> sizes, const BolaParams& params) {
  const auto u = bola_utilities(sizes);
  int best = 0;
  double best_score = (params.v * (u[0] + params.gamma_p) - buffer_segments) / sizes[0];
  for (std::size_t m = 1; m < sizes.size(); ++m) {
    const double score = (params.v * (u[m] + params.gamma_p) - buffer_segments) / sizes[m];
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(m);
    }
  }
  return best;
}

namespace {
std::vector<double> ladder_sizes(const Ladder& ladder, double segment_duration_s) {
  std::vector<double> sizes;
  sizes.reserve(ladder.size());
  for (const auto& rep : ladder) sizes.push_back(static_cast<double>(segment_bytes(rep, segment_duration_s)));
  return sizes;
}
}  // namespace

int bola_choose(const PlayerState& state, const Ladder& ladder, const BolaParams& params) {
  const auto sizes = ladder_sizes(ladder, state.segment_duration_s);
  return bola_choose_sizes(state.buffer_segments(), sizes, params);
}

int hybrid_choose(const PlayerState& state, const Ladder& ladder, double safety, const BolaParams& params) {
  if (ladder.empty()) throw std::invalid_argument("hybrid: ladder is empty");
  if (!(safety > 0.0 && safety <= 1.0)) throw std::invalid_argument("hybrid: safety must be in (0, 1]");
  int pick = 0;
  for (std::size_t m = 0; m < ladder.size(); ++m)
    if (static_cast<double>(ladder[m].bitrate_bps) <= safety * state.throughput_est_bps) pick = static_cast<int>(m);
  pick = std::min(pick, bola_choose(state, ladder, params) + 1);
  if (state.buffer_s < 2.0 * state.segment_duration_s) pick = std::max(0, pick - 1);
  return pick;
}

}  // namespace hybridcdn
