#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hybridcdn/media.hpp"

namespace hybridcdn {

enum class DeviceClass { Pc, Mobile, Edge };

std::string_view to_string(DeviceClass device);

// Reference clip lengths behind the measured tables, in 2 s segments.
inline constexpr double kTranscodeReferenceSegments = 90.0;  // 3-minute clip
inline constexpr double kPowerReferenceSegments = 150.0;     // 5-minute clip

/// One measured transcode job over the 3-minute reference clip.
struct TranscodeEntry {
  std::int64_t source_bps = 0;
  std::int64_t target_bps = 0;
  DeviceClass device = DeviceClass::Pc;  // Pc or Mobile
  double total_time_s = 0.0;
  double vmaf = 0.0;

  friend bool operator==(const TranscodeEntry&, const TranscodeEntry&) = default;
};

enum class PowerOperation { Play, Transcode, TranscodePlay };

std::string_view to_string(PowerOperation op);

/// Peer power draw over the 5-minute reference clip for one transcode profile.
struct PowerEntry {
  PowerOperation operation = PowerOperation::Play;
  std::int64_t profile_source_bps = 0;
  std::int64_t profile_target_bps = 0;
  double power_kwh_e3 = 0.0;  // kWh x 10^-3
  double battery_pct = 0.0;

  friend bool operator==(const PowerEntry&, const PowerEntry&) = default;
};

struct PeerEnergy {
  double kwh = 0.0;
  double battery_pct = 0.0;
};

/// Measured transcode time, quality, and power tables plus edge parameters.
/// Immutable once built; share freely across threads.
class CostTables {
 public:
  CostTables(std::vector<TranscodeEntry> transcode, std::vector<PowerEntry> power,
             double edge_power_watts = 200.0, double edge_speed_factor = 1.0);

  /// The ten measured (source, target) pairs on PC and Mobile, and the six
  /// power rows for the 791k->262k and 4219k->2484k profiles.
  static CostTables published();

  /// Reads the sectioned CSV layout written by write_csv(). Throws ParseError.
  static CostTables from_csv(std::istream& in, double edge_power_watts = 200.0,
                             double edge_speed_factor = 1.0);
  void write_csv(std::ostream& out) const;

  const std::vector<TranscodeEntry>& transcode_entries() const noexcept { return transcode_; }
  const std::vector<PowerEntry>& power_entries() const noexcept { return power_; }
  double edge_power_watts() const noexcept { return edge_power_watts_; }
  double edge_speed_factor() const noexcept { return edge_speed_factor_; }

  CostTables with_edge(double edge_power_watts, double edge_speed_factor) const;

  // Throws ConfigError unless every ladder pair (source rung > target rung)
  // has a PC and a Mobile entry.
  void validate_coverage(const Ladder& ladder) const;

  /// Seconds to transcode one 2 s segment. Edge runs the PC timing divided by
  /// the edge speed factor. Throws InvalidTranscodeDirection unless
  /// source > target, ConfigError when the pair was never measured.
  double transcode_time_per_segment(const Representation& source, const Representation& target,
                                    DeviceClass device) const;

  /// Edge reuses the PC column.
  double transcoded_vmaf(const Representation& source, const Representation& target,
                         DeviceClass device) const;

  /// Per-segment peer energy and battery drain. The profile is the measured
  /// one whose target bitrate is nearest in log scale; the TR+PLY row applies
  /// when the peer is also playing, otherwise the TR row.
  PeerEnergy peer_transcode_battery_per_segment(const Representation& source,
                                                const Representation& target,
                                                bool playing = false) const;

  /// The (source, target) profile a job is charged against.
  const PowerEntry& power_profile_for(const Representation& source, const Representation& target,
                                      PowerOperation operation) const;

  /// job_time_s x edge_power_watts / 3.6e6.
  double edge_transcode_energy(double job_time_s) const;

 private:
  const TranscodeEntry& find_entry(std::int64_t source_bps, std::int64_t target_bps,
                                   DeviceClass device) const;

  std::vector<TranscodeEntry> transcode_;
  std::vector<PowerEntry> power_;
  double edge_power_watts_;
  double edge_speed_factor_;
};

/// bytes x 8 / available_bps. Throws UnreachableSource when the share is
/// not positive.
double transmission_time(std::int64_t bytes, double available_bps);

}  // namespace hybridcdn
