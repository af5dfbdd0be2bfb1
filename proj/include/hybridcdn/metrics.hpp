#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hybridcdn/cost_models.hpp"
#include "hybridcdn/decision.hpp"
#include "hybridcdn/media.hpp"
#include "hybridcdn/registry.hpp"

namespace hybridcdn {

enum class RequestStatus { Served, Failed };
enum class TranscodeSite { None, Edge, Peer };

std::string_view to_string(RequestStatus status);
std::string_view to_string(TranscodeSite site);

/// One client segment request, from issue to delivery.
struct RequestRecord {
  std::uint64_t request_id = 0;
  double issue_time_s = 0.0;
  NodeId client_id = 0;
  SegmentRef ref;
  RequestStatus status = RequestStatus::Served;
  Action action = Action::OriginFetch;  // decision that served (or last tried)
  NodeId source = 0;
  std::optional<int> transcode_source_rung;
  int attempts = 1;
  double est_transmission_s = 0.0;
  double est_computation_s = 0.0;
  double transmission_s = 0.0;
  double computation_s = 0.0;     // transcode queue wait plus execution
  double failed_attempt_s = 0.0;  // time lost on attempts that failed
  double serving_latency_s = 0.0;
  double delivered_vmaf = 0.0;
  double stall_contribution_s = 0.0;
  TranscodeSite transcode_site = TranscodeSite::None;
  DeviceClass transcode_device = DeviceClass::Edge;
  double transcode_job_s = 0.0;  // execution only, no queue wait
  bool transcoder_playing = false;

  friend bool operator==(const RequestRecord&, const RequestRecord&) = default;
};

struct QoeWeights {
  double switch_weight = 1.0;
  double stall_weight = 1.0;
};

/// 1 + 4 x clamp(mean(v)/100 - w_sw x mean|v_i - v_{i-1}|/100 - w_st x stall/playback).
/// Throws UndefinedSession for an empty session.
double qoe_proxy(std::span<const double> vmaf, double stall_s, double playback_s, const QoeWeights& weights = {});
/// Served records of one session in request order; playback is one segment
/// duration per record.
double qoe_proxy(std::span<const RequestRecord> session, double segment_duration_s, const QoeWeights& weights = {});

/// Transcoded VMAF for actions 2, 4, 5 (device of the executing node), the
/// reference VMAF of the rung otherwise.
double delivered_vmaf_of(const Decision& decision, const SegmentRef& ref, DeviceClass executing_device,
                         const CostTables& tables, const Ladder& ladder, std::span<const double> reference_vmaf);

struct EnergyTotals {
  double edge_kwh = 0.0;
  double peer_kwh = 0.0;
};

EnergyTotals energy_rollup(std::span<const RequestRecord> trace, const CostTables& tables, const Ladder& ladder);

struct MetricsSummary {
  std::uint64_t requests = 0;
  std::uint64_t served = 0;
  std::uint64_t failed = 0;
  std::uint64_t sessions = 0;
  double mean_serving_latency_s = 0.0;
  double mean_qoe = 0.0;  // mean over sessions with at least one served segment
  double edge_energy_kwh = 0.0;
  double peer_energy_kwh = 0.0;
  std::array<std::uint64_t, kActionCount> action_histogram{};  // index = action - 1, served only
  std::uint64_t edge_transcodes = 0;
  std::uint64_t peer_transcodes = 0;
  double stall_ratio = 0.0;  // total stall / total playback
  double mean_delivered_bitrate_bps = 0.0;

  std::uint64_t action_count(Action a) const { return action_histogram[action_number(a) - 1]; }
  friend bool operator==(const MetricsSummary&, const MetricsSummary&) = default;
};

struct MetricsContext {
  const Ladder* ladder = nullptr;
  const CostTables* tables = nullptr;
  double segment_duration_s = 2.0;
  QoeWeights weights;
};

/// Pure function of the trace.
MetricsSummary summarize(std::span<const RequestRecord> trace, const MetricsContext& ctx);

/// Summary fields by name, in a fixed order, for comparison tables.
struct NamedMetric {
  std::string name;
  double value;
};
std::vector<NamedMetric> metric_fields(const MetricsSummary& summary);
std::vector<std::string> metric_names();

void write_summary_json(std::ostream& out, const MetricsSummary& summary);
MetricsSummary read_summary_json(std::istream& in);

/// Header plus one line per record; doubles are written with round-trip
/// precision.
void write_trace_csv(std::ostream& out, std::span<const RequestRecord> trace);
std::vector<RequestRecord> read_trace_csv(std::istream& in);  // throws ParseError

/// FNV-1a over every record field.
std::uint64_t trace_hash(std::span<const RequestRecord> trace);

}  // namespace hybridcdn
