#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hybridcdn/media.hpp"
#include "hybridcdn/registry.hpp"

namespace hybridcdn {

// Client -> edge report. Full state, sent every monitoring interval.
struct CmcdReport {
  NodeId peer_id = 0;
  PeerRole role = PeerRole::Leecher;
  double join_time_s = 0.0;  // carried with millisecond precision
  int battery_pct = 100;
  DeviceClass device = DeviceClass::Pc;  // pc or mobile
  bool playing = false;
  std::vector<SegmentRef> cached;
  std::int64_t last_mile_bps = 0;

  friend bool operator==(const CmcdReport&, const CmcdReport&) = default;
};

// Server -> edge report.
struct CmsdReport {
  NodeId server_id = 0;
  std::vector<SegmentRef> cached;
  double fill_ratio = 0.0;  // carried with three decimals

  friend bool operator==(const CmsdReport&, const CmsdReport&) = default;
};

using Report = std::variant<CmcdReport, CmsdReport>;

// Wire keys. All custom keys carry the x-hc- prefix.
namespace keys {
inline constexpr std::string_view kBattery = "x-hc-batt";
inline constexpr std::string_view kBandwidth = "x-hc-bw";
inline constexpr std::string_view kCache = "x-hc-cache";
inline constexpr std::string_view kDevice = "x-hc-dev";
inline constexpr std::string_view kFill = "x-hc-fill";
inline constexpr std::string_view kId = "x-hc-id";
inline constexpr std::string_view kJoin = "x-hc-join";
inline constexpr std::string_view kPlaying = "x-hc-play";
inline constexpr std::string_view kRole = "x-hc-role";
}  // namespace keys

/// key=value pairs joined by ',' with keys in lexicographic order. Cached
/// segments are written as channel.index.rung triplets joined by '|'.
std::string encode_report(const Report& report);

/// Inverse of encode_report. Key order is irrelevant and unknown keys are
/// skipped. Throws ParseError naming the offending key.
Report decode_report(std::string_view line);

/// Replaces the sender's NodeView with one built from the report, stamped
/// with now_s. Tracker-owned bookkeeping (group, transcode budget spend,
/// transcode capability) carries over. Returns false when a strictly
/// newer report was already applied (equal timestamps overwrite).
bool apply_report(Registry& registry, const Report& report, double now_s);

}  // namespace hybridcdn
