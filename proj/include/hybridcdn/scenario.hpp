#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hybridcdn/abr.hpp"
#include "hybridcdn/decision.hpp"
#include "hybridcdn/media.hpp"

namespace hybridcdn {

struct ChurnParams {
  bool enabled = false;
  double arrival_rate_per_s = 1.0;  // Poisson arrivals while below peer_count
  double mean_session_s = 120.0;    // exponential session length
  double join_spread_s = 30.0;      // churn off: joins uniform in [0, spread]
};

/// One simulation run. Every field maps to a key of the scenario file; see
/// README.md for the key list.
struct ScenarioConfig {
  std::uint64_t seed = 1;
  double duration_s = 600.0;

  int peer_count = 50;
  int group_count = 1;
  double seeder_fraction = 0.2;

  Policy policy = Policy::Full;
  SelectionRule selection = SelectionRule::MinServingTime;
  AbrKind abr = AbrKind::Bola;

  Ladder ladder = default_ladder();
  int channel_count = 5;
  double segment_duration_s = 2.0;
  double zipf_alpha = 0.7;
  std::int64_t live_window_segments = 150;

  int cdn_count = 4;
  double cdn_cache_fraction = 0.40;
  double vts_cache_fraction = 0.05;
  int peer_cache_segments = 5;

  double cdn_link_bps = 100e6;
  double origin_link_bps = 50e6;
  double peer_down_bps = 20e6;
  double peer_up_bps = 5e6;
  int peer_upload_slots = 2;
  int vts_transcode_slots = 4;

  double monitoring_interval_s = 1.0;
  ChurnParams churn;

  double battery_threshold_pct = 20.0;
  double battery_budget_pct = 2.0;
  bool peer_transcoding = true;
  double mobile_fraction = 0.5;
  double mobile_battery_min_pct = 10.0;
  double mobile_battery_max_pct = 100.0;

  double edge_power_watts = 200.0;
  double edge_speed_factor = 1.0;
  std::string cost_tables_path;  // empty: built-in tables

  BolaParams bola;
  double hybrid_safety = 0.9;
  int throughput_window = 5;
  double startup_buffer_min_s = 4.0;
  double startup_buffer_max_s = 16.0;
  double request_jitter_s = 2.0;  // per-client delay after a segment appears
  double max_buffer_s = 50.0;

  double qoe_switch_weight = 1.0;
  double qoe_stall_weight = 1.0;
  std::vector<double> reference_vmaf = {16, 46, 78, 95, 98};

  /// Throws ConfigError describing the first invalid field.
  void validate() const;
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys and bad
/// values throw ConfigError. Missing keys keep their defaults.
ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig load_scenario(const std::string& path);

/// Writes every key; parse_scenario(write_scenario(c)) reproduces c.
void write_scenario(std::ostream& out, const ScenarioConfig& config);

}  // namespace hybridcdn
