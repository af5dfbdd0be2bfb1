#include "hybridcdn/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "hybridcdn/errors.hpp"

namespace hybridcdn {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double to_real(const std::string& key, const std::string& v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

// "89000:320p,262000:480p,..."
Ladder to_ladder(const std::string& key, const std::string& v) {
  Ladder ladder;
  for (const auto& item : split(v, ',')) {
    const auto colon = item.find(':');
    Representation rep;
    rep.rung_index = static_cast<int>(ladder.size());
    rep.bitrate_bps = to_int(key, trim(item.substr(0, colon)));
    rep.resolution_label = colon == std::string::npos ? "" : trim(item.substr(colon + 1));
    ladder.push_back(rep);
  }
  try {
    validate_ladder(ladder);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
  return ladder;
}

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

using Setter = std::function<void(ScenarioConfig&, const std::string& key, const std::string& value)>;

template <typename T>
Setter real_field(T ScenarioConfig::*field) {
  return [field](ScenarioConfig& c, const std::string& k, const std::string& v) { c.*field = to_real(k, v); };
}

template <typename T>
Setter int_field(T ScenarioConfig::*field) {
  return [field](ScenarioConfig& c, const std::string& k, const std::string& v) {
    c.*field = static_cast<T>(to_int(k, v));
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         const auto s = to_int(k, v);
         if (s < 0) throw ConfigError(k + ": must be >= 0");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"duration_s", real_field(&ScenarioConfig::duration_s)},
      {"peer_count", int_field(&ScenarioConfig::peer_count)},
      {"group_count", int_field(&ScenarioConfig::group_count)},
      {"seeder_fraction", real_field(&ScenarioConfig::seeder_fraction)},
      {"policy", [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         try {
           c.policy = parse_policy(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError(k + ": " + e.what());
         }
       }},
      {"selection", [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         try {
           c.selection = parse_selection_rule(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError(k + ": " + e.what());
         }
       }},
      {"abr", [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         try {
           c.abr = parse_abr(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError(k + ": " + e.what());
         }
       }},
      {"ladder", [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.ladder = to_ladder(k, v); }},
      {"channel_count", int_field(&ScenarioConfig::channel_count)},
      {"segment_duration_s", real_field(&ScenarioConfig::segment_duration_s)},
      {"zipf_alpha", real_field(&ScenarioConfig::zipf_alpha)},
      {"live_window_segments", int_field(&ScenarioConfig::live_window_segments)},
      {"cdn_count", int_field(&ScenarioConfig::cdn_count)},
      {"cdn_cache_fraction", real_field(&ScenarioConfig::cdn_cache_fraction)},
      {"vts_cache_fraction", real_field(&ScenarioConfig::vts_cache_fraction)},
      {"peer_cache_segments", int_field(&ScenarioConfig::peer_cache_segments)},
      {"cdn_link_bps", real_field(&ScenarioConfig::cdn_link_bps)},
      {"origin_link_bps", real_field(&ScenarioConfig::origin_link_bps)},
      {"peer_down_bps", real_field(&ScenarioConfig::peer_down_bps)},
      {"peer_up_bps", real_field(&ScenarioConfig::peer_up_bps)},
      {"peer_upload_slots", int_field(&ScenarioConfig::peer_upload_slots)},
      {"vts_transcode_slots", int_field(&ScenarioConfig::vts_transcode_slots)},
      {"monitoring_interval_s", real_field(&ScenarioConfig::monitoring_interval_s)},
      {"churn", [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.churn.enabled = to_bool(k, v); }},
      {"churn_arrival_rate_per_s",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.churn.arrival_rate_per_s = to_real(k, v); }},
      {"churn_mean_session_s",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.churn.mean_session_s = to_real(k, v); }},
      {"join_spread_s",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.churn.join_spread_s = to_real(k, v); }},
      {"battery_threshold_pct", real_field(&ScenarioConfig::battery_threshold_pct)},
      {"battery_budget_pct", real_field(&ScenarioConfig::battery_budget_pct)},
      {"peer_transcoding",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.peer_transcoding = to_bool(k, v); }},
      {"mobile_fraction", real_field(&ScenarioConfig::mobile_fraction)},
      {"mobile_battery_min_pct", real_field(&ScenarioConfig::mobile_battery_min_pct)},
      {"mobile_battery_max_pct", real_field(&ScenarioConfig::mobile_battery_max_pct)},
      {"edge_power_watts", real_field(&ScenarioConfig::edge_power_watts)},
      {"edge_speed_factor", real_field(&ScenarioConfig::edge_speed_factor)},
      {"cost_tables", [](ScenarioConfig& c, const std::string&, const std::string& v) { c.cost_tables_path = v; }},
      {"bola_v", [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.bola.v = to_real(k, v); }},
      {"bola_gamma_p",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.bola.gamma_p = to_real(k, v); }},
      {"hybrid_safety", real_field(&ScenarioConfig::hybrid_safety)},
      {"throughput_window", int_field(&ScenarioConfig::throughput_window)},
      {"startup_buffer_min_s", real_field(&ScenarioConfig::startup_buffer_min_s)},
      {"startup_buffer_max_s", real_field(&ScenarioConfig::startup_buffer_max_s)},
      {"request_jitter_s", real_field(&ScenarioConfig::request_jitter_s)},
      {"max_buffer_s", real_field(&ScenarioConfig::max_buffer_s)},
      {"qoe_switch_weight", real_field(&ScenarioConfig::qoe_switch_weight)},
      {"qoe_stall_weight", real_field(&ScenarioConfig::qoe_stall_weight)},
      {"reference_vmaf", [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         c.reference_vmaf.clear();
         for (const auto& item : split(v, ',')) c.reference_vmaf.push_back(to_real(k, item));
       }},
  };
  return table;
}

}  // namespace

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(duration_s >= 0.0, "duration_s must be >= 0");
  require(peer_count >= 1, "peer_count must be >= 1");
  require(group_count >= 1, "group_count must be >= 1");
  require(peer_count >= group_count, "peer_count must be >= group_count");
  require(seeder_fraction > 0.0 && seeder_fraction <= 1.0, "seeder_fraction must be in (0, 1]");
  try {
    validate_ladder(ladder);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("ladder: ") + e.what());
  }
  require(channel_count >= 1, "channel_count must be >= 1");
  require(segment_duration_s > 0.0, "segment_duration_s must be > 0");
  require(zipf_alpha >= 0.0, "zipf_alpha must be >= 0");
  require(live_window_segments >= 1, "live_window_segments must be >= 1");
  require(cdn_count >= 1, "cdn_count must be >= 1");
  require(cdn_cache_fraction > 0.0 && cdn_cache_fraction <= 1.0, "cdn_cache_fraction must be in (0, 1]");
  require(vts_cache_fraction > 0.0 && vts_cache_fraction <= 1.0, "vts_cache_fraction must be in (0, 1]");
  require(peer_cache_segments >= 1, "peer_cache_segments must be >= 1");
  require(cdn_link_bps > 0 && origin_link_bps > 0 && peer_down_bps > 0 && peer_up_bps > 0,
          "link capacities must be > 0");
  require(peer_upload_slots >= 1, "peer_upload_slots must be >= 1");
  require(vts_transcode_slots >= 1, "vts_transcode_slots must be >= 1");
  require(monitoring_interval_s > 0.0, "monitoring_interval_s must be > 0");
  require(churn.arrival_rate_per_s > 0.0, "churn_arrival_rate_per_s must be > 0");
  require(churn.mean_session_s > 0.0, "churn_mean_session_s must be > 0");
  require(churn.join_spread_s >= 0.0, "join_spread_s must be >= 0");
  require(battery_threshold_pct >= 0.0 && battery_threshold_pct <= 100.0, "battery_threshold_pct out of range");
  require(battery_budget_pct >= 0.0, "battery_budget_pct must be >= 0");
  require(mobile_fraction >= 0.0 && mobile_fraction <= 1.0, "mobile_fraction must be in [0, 1]");
  require(mobile_battery_min_pct >= 0.0 && mobile_battery_min_pct <= mobile_battery_max_pct &&
              mobile_battery_max_pct <= 100.0,
          "mobile battery range must satisfy 0 <= min <= max <= 100");
  require(edge_power_watts >= 0.0, "edge_power_watts must be >= 0");
  require(edge_speed_factor > 0.0, "edge_speed_factor must be > 0");
  require(bola.v > 0.0 && bola.gamma_p > 0.0, "bola parameters must be > 0");
  require(hybrid_safety > 0.0 && hybrid_safety <= 1.0, "hybrid_safety must be in (0, 1]");
  require(throughput_window >= 1, "throughput_window must be >= 1");
  require(startup_buffer_min_s > 0.0 && startup_buffer_min_s <= startup_buffer_max_s,
          "startup buffer range must satisfy 0 < min <= max");
  require(request_jitter_s >= 0.0, "request_jitter_s must be >= 0");
  require(max_buffer_s >= startup_buffer_max_s, "max_buffer_s must be >= startup_buffer_max_s");
  require(qoe_switch_weight >= 0.0 && qoe_stall_weight >= 0.0, "qoe weights must be >= 0");
  require(reference_vmaf.size() == ladder.size(), "reference_vmaf needs one value per rung");
  for (double v : reference_vmaf) require(v >= 0.0 && v <= 100.0, "reference_vmaf values must be in [0, 100]");
}

ScenarioConfig parse_scenario(std::istream& in) {
  ScenarioConfig c;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    it->second(c, key, value);
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  return parse_scenario(in);
}

void write_scenario(std::ostream& out, const ScenarioConfig& c) {
  std::string ladder;
  for (const auto& rep : c.ladder) {
    if (!ladder.empty()) ladder += ',';
    ladder += std::to_string(rep.bitrate_bps) + ":" + rep.resolution_label;
  }
  std::string vmaf;
  for (double v : c.reference_vmaf) {
    if (!vmaf.empty()) vmaf += ',';
    vmaf += fmt(v);
  }
  out << "seed = " << c.seed << '\n'
      << "duration_s = " << fmt(c.duration_s) << '\n'
      << "peer_count = " << c.peer_count << '\n'
      << "group_count = " << c.group_count << '\n'
      << "seeder_fraction = " << fmt(c.seeder_fraction) << '\n'
      << "policy = " << to_string(c.policy) << '\n'
      << "selection = " << to_string(c.selection) << '\n'
      << "abr = " << to_string(c.abr) << '\n'
      << "ladder = " << ladder << '\n'
      << "channel_count = " << c.channel_count << '\n'
      << "segment_duration_s = " << fmt(c.segment_duration_s) << '\n'
      << "zipf_alpha = " << fmt(c.zipf_alpha) << '\n'
      << "live_window_segments = " << c.live_window_segments << '\n'
      << "cdn_count = " << c.cdn_count << '\n'
      << "cdn_cache_fraction = " << fmt(c.cdn_cache_fraction) << '\n'
      << "vts_cache_fraction = " << fmt(c.vts_cache_fraction) << '\n'
      << "peer_cache_segments = " << c.peer_cache_segments << '\n'
      << "cdn_link_bps = " << fmt(c.cdn_link_bps) << '\n'
      << "origin_link_bps = " << fmt(c.origin_link_bps) << '\n'
      << "peer_down_bps = " << fmt(c.peer_down_bps) << '\n'
      << "peer_up_bps = " << fmt(c.peer_up_bps) << '\n'
      << "peer_upload_slots = " << c.peer_upload_slots << '\n'
      << "vts_transcode_slots = " << c.vts_transcode_slots << '\n'
      << "monitoring_interval_s = " << fmt(c.monitoring_interval_s) << '\n'
      << "churn = " << (c.churn.enabled ? 1 : 0) << '\n'
      << "churn_arrival_rate_per_s = " << fmt(c.churn.arrival_rate_per_s) << '\n'
      << "churn_mean_session_s = " << fmt(c.churn.mean_session_s) << '\n'
      << "join_spread_s = " << fmt(c.churn.join_spread_s) << '\n'
      << "battery_threshold_pct = " << fmt(c.battery_threshold_pct) << '\n'
      << "battery_budget_pct = " << fmt(c.battery_budget_pct) << '\n'
      << "peer_transcoding = " << (c.peer_transcoding ? 1 : 0) << '\n'
      << "mobile_fraction = " << fmt(c.mobile_fraction) << '\n'
      << "mobile_battery_min_pct = " << fmt(c.mobile_battery_min_pct) << '\n'
      << "mobile_battery_max_pct = " << fmt(c.mobile_battery_max_pct) << '\n'
      << "edge_power_watts = " << fmt(c.edge_power_watts) << '\n'
      << "edge_speed_factor = " << fmt(c.edge_speed_factor) << '\n';
  if (!c.cost_tables_path.empty()) out << "cost_tables = " << c.cost_tables_path << '\n';
  out << "bola_v = " << fmt(c.bola.v) << '\n'
      << "bola_gamma_p = " << fmt(c.bola.gamma_p) << '\n'
      << "hybrid_safety = " << fmt(c.hybrid_safety) << '\n'
      << "throughput_window = " << c.throughput_window << '\n'
      << "startup_buffer_min_s = " << fmt(c.startup_buffer_min_s) << '\n'
      << "startup_buffer_max_s = " << fmt(c.startup_buffer_max_s) << '\n'
      << "request_jitter_s = " << fmt(c.request_jitter_s) << '\n'
      << "max_buffer_s = " << fmt(c.max_buffer_s) << '\n'
      << "qoe_switch_weight = " << fmt(c.qoe_switch_weight) << '\n'
      << "qoe_stall_weight = " << fmt(c.qoe_stall_weight) << '\n'
      << "reference_vmaf = " << vmaf << '\n';
}

}  // namespace hybridcdn
