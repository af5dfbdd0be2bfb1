#include "hybridcdn/messaging.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>

#include "hybridcdn/errors.hpp"

namespace hybridcdn {

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string encode_cache(const std::vector<SegmentRef>& cached) {
  std::string out;
  for (std::size_t i = 0; i < cached.size(); ++i) {
    if (i) out += '|';
    out += std::to_string(cached[i].channel_id);
    out += '.';
    out += std::to_string(cached[i].segment_index);
    out += '.';
    out += std::to_string(cached[i].rung_index);
  }
  return out;
}

template <typename Int>
Int parse_integer(std::string_view s, std::string_view key) {
  Int v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ParseError(std::string(key), "expected an integer, got '" + std::string(s) + "'");
  return v;
}

double parse_real(std::string_view s, std::string_view key) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    throw ParseError(std::string(key), "expected a number, got '" + std::string(s) + "'");
  return v;
}

std::vector<SegmentRef> parse_cache(std::string_view s) {
  std::vector<SegmentRef> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t bar = s.find('|', start);
    const std::string_view triplet = s.substr(start, bar == std::string_view::npos ? s.npos : bar - start);
    const std::size_t d1 = triplet.find('.');
    const std::size_t d2 = d1 == triplet.npos ? triplet.npos : triplet.find('.', d1 + 1);
    if (d1 == triplet.npos || d2 == triplet.npos)
      throw ParseError(std::string(keys::kCache), "malformed triplet '" + std::string(triplet) + "'");
    SegmentRef ref;
    ref.channel_id = parse_integer<int>(triplet.substr(0, d1), keys::kCache);
    ref.segment_index = parse_integer<std::int64_t>(triplet.substr(d1 + 1, d2 - d1 - 1), keys::kCache);
    ref.rung_index = parse_integer<int>(triplet.substr(d2 + 1), keys::kCache);
    if (ref.channel_id < 0 || ref.segment_index < 0 || ref.rung_index < 0)
      throw ParseError(std::string(keys::kCache), "negative component in '" + std::string(triplet) + "'");
    out.push_back(ref);
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return out;
}

}  // namespace

std::string encode_report(const Report& report) {
  // std::map keeps keys sorted, which is the required wire order.
  std::map<std::string_view, std::string> kv;
  if (const auto* c = std::get_if<CmcdReport>(&report)) {
    kv[keys::kBattery] = std::to_string(c->battery_pct);
    kv[keys::kBandwidth] = std::to_string(c->last_mile_bps);
    kv[keys::kCache] = encode_cache(c->cached);
    kv[keys::kDevice] = c->device == DeviceClass::Mobile ? "mob" : "pc";
    kv[keys::kId] = std::to_string(c->peer_id);
    kv[keys::kJoin] = fixed3(c->join_time_s);
    kv[keys::kPlaying] = c->playing ? "1" : "0";
    kv[keys::kRole] = c->role == PeerRole::Seeder ? "s" : "l";
  } else {
    const auto& s = std::get<CmsdReport>(report);
    kv[keys::kCache] = encode_cache(s.cached);
    kv[keys::kFill] = fixed3(s.fill_ratio);
    kv[keys::kId] = std::to_string(s.server_id);
    kv[keys::kRole] = "cdn";
  }
  std::string line;
  for (const auto& [k, v] : kv) {
    if (!line.empty()) line += ',';
    line += k;
    line += '=';
    line += v;
  }
  return line;
}

Report decode_report(std::string_view line) {
  std::map<std::string_view, std::string_view> kv;
  std::size_t start = 0;
  while (start <= line.size()) {
    const std::size_t comma = line.find(',', start);
    const std::string_view pair = line.substr(start, comma == line.npos ? line.npos : comma - start);
    const std::size_t eq = pair.find('=');
    if (eq == pair.npos || eq == 0) throw ParseError(std::string(pair), "malformed key=value pair");
    const std::string_view key = pair.substr(0, eq);
    if (!kv.emplace(key, pair.substr(eq + 1)).second) throw ParseError(std::string(key), "duplicate key");
    if (comma == line.npos) break;
    start = comma + 1;
  }

  auto require = [&](std::string_view key) -> std::string_view {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(std::string(key), "missing required key");
    return it->second;
  };

  const std::string_view role = require(keys::kRole);
  if (role == "cdn") {
    CmsdReport s;
    s.server_id = parse_integer<NodeId>(require(keys::kId), keys::kId);
    s.cached = parse_cache(require(keys::kCache));
    s.fill_ratio = parse_real(require(keys::kFill), keys::kFill);
    if (s.fill_ratio < 0.0 || s.fill_ratio > 1.0)
      throw ParseError(std::string(keys::kFill), "fill ratio outside [0, 1]");
    return s;
  }
  if (role != "s" && role != "l") throw ParseError(std::string(keys::kRole), "role must be s, l or cdn");

  CmcdReport c;
  c.role = role == "s" ? PeerRole::Seeder : PeerRole::Leecher;
  c.peer_id = parse_integer<NodeId>(require(keys::kId), keys::kId);
  c.join_time_s = parse_real(require(keys::kJoin), keys::kJoin);
  if (c.join_time_s < 0.0) throw ParseError(std::string(keys::kJoin), "join time must be >= 0");
  c.battery_pct = parse_integer<int>(require(keys::kBattery), keys::kBattery);
  if (c.battery_pct < 0 || c.battery_pct > 100)
    throw ParseError(std::string(keys::kBattery), "battery outside [0, 100]");
  const std::string_view dev = require(keys::kDevice);
  if (dev == "pc") {
    c.device = DeviceClass::Pc;
  } else if (dev == "mob") {
    c.device = DeviceClass::Mobile;
  } else {
    throw ParseError(std::string(keys::kDevice), "device must be pc or mob");
  }
  const std::string_view play = require(keys::kPlaying);
  if (play != "0" && play != "1") throw ParseError(std::string(keys::kPlaying), "play must be 0 or 1");
  c.playing = play == "1";
  c.cached = parse_cache(require(keys::kCache));
  c.last_mile_bps = parse_integer<std::int64_t>(require(keys::kBandwidth), keys::kBandwidth);
  if (c.last_mile_bps < 0) throw ParseError(std::string(keys::kBandwidth), "bandwidth must be >= 0");
  return c;
}

bool apply_report(Registry& registry, const Report& report, double now_s) {
  NodeView view;
  if (const auto* c = std::get_if<CmcdReport>(&report)) {
    view.node_id = c->peer_id;
    view.kind = NodeKind::Peer;
    view.role = c->role;
    view.join_time_s = c->join_time_s;
    view.battery_pct = c->battery_pct;
    view.device = c->device;
    view.playing = c->playing;
    view.cached = c->cached;
    view.available_bps = static_cast<double>(c->last_mile_bps);
    view.transcode_slots_free = 1;
  } else {
    const auto& s = std::get<CmsdReport>(report);
    view.node_id = s.server_id;
    view.kind = NodeKind::Cdn;
    view.cached = s.cached;
  }
  normalize_cached(view.cached);
  view.report_time_s = now_s;

  if (const NodeView* prev = registry.find(view.node_id)) {
    if (prev->report_time_s > now_s) return false;
    view.group_id = prev->group_id;
    view.transcode_battery_spent_pct = prev->transcode_battery_spent_pct;
    view.transcode_enabled = prev->transcode_enabled;
    view.available_bps = view.kind == NodeKind::Cdn ? prev->available_bps : view.available_bps;
  }
  return registry.upsert(std::move(view));
}

}  // namespace hybridcdn
