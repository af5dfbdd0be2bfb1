#include "hybridcdn/metrics.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "hybridcdn/errors.hpp"

namespace hybridcdn {

std::string_view to_string(RequestStatus status) {
  return status == RequestStatus::Served ? "served" : "failed";
}

std::string_view to_string(TranscodeSite site) {
  switch (site) {
    case TranscodeSite::None: return "none";
    case TranscodeSite::Edge: return "edge";
    case TranscodeSite::Peer: return "peer";
  }
  return "?";
}

double qoe_proxy(std::span<const double> vmaf, double stall_s, double playback_s, const QoeWeights& w) {
  if (vmaf.empty()) throw UndefinedSession("qoe_proxy needs at least one segment");
  double sum = 0.0;
  for (double v : vmaf) sum += v;
  const double base = sum / static_cast<double>(vmaf.size()) / 100.0;
  double switches = 0.0;
  for (std::size_t i = 1; i < vmaf.size(); ++i) switches += std::abs(vmaf[i] - vmaf[i - 1]);
  const double switch_pen =
      vmaf.size() > 1 ? w.switch_weight * switches / static_cast<double>(vmaf.size() - 1) / 100.0 : 0.0;
  const double stall_pen = playback_s > 0.0 ? w.stall_weight * stall_s / playback_s : 0.0;
  return 1.0 + 4.0 * std::clamp(base - switch_pen - stall_pen, 0.0, 1.0);
}

double qoe_proxy(std::span<const RequestRecord> session, double segment_duration_s, const QoeWeights& w) {
  std::vector<double> vmaf;
  double stall = 0.0;
  for (const auto& r : session) {
    stall += r.stall_contribution_s;
    if (r.status == RequestStatus::Served) vmaf.push_back(r.delivered_vmaf);
  }
  return qoe_proxy(vmaf, stall, static_cast<double>(vmaf.size()) * segment_duration_s, w);
}

double delivered_vmaf_of(const Decision& d, const SegmentRef& ref, DeviceClass device, const CostTables& tables,
                         const Ladder& ladder, std::span<const double> reference_vmaf) {
  if (is_transcode(d.action) && d.transcode_source_rung) {
    if (d.action != Action::P2PTranscode) device = DeviceClass::Edge;
    return tables.transcoded_vmaf(ladder.at(static_cast<std::size_t>(*d.transcode_source_rung)),
                                  ladder.at(static_cast<std::size_t>(ref.rung_index)), device);
  }
  return reference_vmaf[static_cast<std::size_t>(ref.rung_index)];
}

EnergyTotals energy_rollup(std::span<const RequestRecord> trace, const CostTables& tables, const Ladder& ladder) {
  EnergyTotals e;
  for (const auto& r : trace) {
    if (r.transcode_site == TranscodeSite::Edge) {
      e.edge_kwh += tables.edge_transcode_energy(r.transcode_job_s);
    } else if (r.transcode_site == TranscodeSite::Peer && r.transcode_source_rung) {
      e.peer_kwh += tables
                        .peer_transcode_battery_per_segment(ladder.at(static_cast<std::size_t>(*r.transcode_source_rung)),
                                                            ladder.at(static_cast<std::size_t>(r.ref.rung_index)),
                                                            r.transcoder_playing)
                        .kwh;
    }
  }
  return e;
}

MetricsSummary summarize(std::span<const RequestRecord> trace, const MetricsContext& ctx) {
  MetricsSummary s;
  s.requests = trace.size();
  double latency = 0.0, bitrate = 0.0, stall = 0.0;
  std::map<NodeId, std::vector<RequestRecord>> sessions;
  for (const auto& r : trace) {
    sessions[r.client_id].push_back(r);
    stall += r.stall_contribution_s;
    if (r.status != RequestStatus::Served) {
      ++s.failed;
      continue;
    }
    ++s.served;
    latency += r.serving_latency_s;
    bitrate += static_cast<double>(ctx.ladder->at(static_cast<std::size_t>(r.ref.rung_index)).bitrate_bps);
    ++s.action_histogram[action_number(r.action) - 1];
    if (r.transcode_site == TranscodeSite::Edge) ++s.edge_transcodes;
    if (r.transcode_site == TranscodeSite::Peer) ++s.peer_transcodes;
  }
  if (s.served > 0) {
    latency /= static_cast<double>(s.served);
    bitrate /= static_cast<double>(s.served);
    s.stall_ratio = stall / (static_cast<double>(s.served) * ctx.segment_duration_s);
  }
  s.mean_serving_latency_s = latency;
  s.mean_delivered_bitrate_bps = bitrate;

  double qoe = 0.0;
  for (auto& [client, records] : sessions) {
    std::sort(records.begin(), records.end(),
              [](const RequestRecord& a, const RequestRecord& b) { return a.request_id < b.request_id; });
    const bool any_served = std::any_of(records.begin(), records.end(),
                                        [](const RequestRecord& r) { return r.status == RequestStatus::Served; });
    if (!any_served) continue;
    ++s.sessions;
    qoe += qoe_proxy(records, ctx.segment_duration_s, ctx.weights);
  }
  if (s.sessions > 0) s.mean_qoe = qoe / static_cast<double>(s.sessions);

  const EnergyTotals e = energy_rollup(trace, *ctx.tables, *ctx.ladder);
  s.edge_energy_kwh = e.edge_kwh;
  s.peer_energy_kwh = e.peer_kwh;
  return s;
}

std::vector<NamedMetric> metric_fields(const MetricsSummary& s) {
  std::vector<NamedMetric> out = {
      {"mean_serving_latency_s", s.mean_serving_latency_s},
      {"mean_qoe", s.mean_qoe},
      {"edge_energy_kwh", s.edge_energy_kwh},
      {"peer_energy_kwh", s.peer_energy_kwh},
      {"stall_ratio", s.stall_ratio},
      {"mean_delivered_bitrate_bps", s.mean_delivered_bitrate_bps},
      {"edge_transcodes", static_cast<double>(s.edge_transcodes)},
      {"peer_transcodes", static_cast<double>(s.peer_transcodes)},
      {"requests", static_cast<double>(s.requests)},
      {"served", static_cast<double>(s.served)},
      {"failed", static_cast<double>(s.failed)},
  };
  for (int a = 1; a <= kActionCount; ++a)
    out.push_back({"action_" + std::to_string(a), static_cast<double>(s.action_histogram[a - 1])});
  return out;
}

std::vector<std::string> metric_names() {
  std::vector<std::string> names;
  for (auto& f : metric_fields(MetricsSummary{})) names.push_back(f.name);
  return names;
}

void write_summary_json(std::ostream& out, const MetricsSummary& s) {
  nlohmann::ordered_json j;
  j["requests"] = s.requests;
  j["served"] = s.served;
  j["failed"] = s.failed;
  j["sessions"] = s.sessions;
  j["mean_serving_latency_s"] = s.mean_serving_latency_s;
  j["mean_qoe"] = s.mean_qoe;
  j["edge_energy_kwh"] = s.edge_energy_kwh;
  j["peer_energy_kwh"] = s.peer_energy_kwh;
  j["action_histogram"] = s.action_histogram;
  j["edge_transcodes"] = s.edge_transcodes;
  j["peer_transcodes"] = s.peer_transcodes;
  j["stall_ratio"] = s.stall_ratio;
  j["mean_delivered_bitrate_bps"] = s.mean_delivered_bitrate_bps;
  out << j.dump(2) << '\n';
}

MetricsSummary read_summary_json(std::istream& in) {
  try {
    const auto j = nlohmann::json::parse(in);
    MetricsSummary s;
    s.requests = j.at("requests").get<std::uint64_t>();
    s.served = j.at("served").get<std::uint64_t>();
    s.failed = j.at("failed").get<std::uint64_t>();
    s.sessions = j.at("sessions").get<std::uint64_t>();
    s.mean_serving_latency_s = j.at("mean_serving_latency_s").get<double>();
    s.mean_qoe = j.at("mean_qoe").get<double>();
    s.edge_energy_kwh = j.at("edge_energy_kwh").get<double>();
    s.peer_energy_kwh = j.at("peer_energy_kwh").get<double>();
    s.action_histogram = j.at("action_histogram").get<std::array<std::uint64_t, kActionCount>>();
    s.edge_transcodes = j.at("edge_transcodes").get<std::uint64_t>();
    s.peer_transcodes = j.at("peer_transcodes").get<std::uint64_t>();
    s.stall_ratio = j.at("stall_ratio").get<double>();
    s.mean_delivered_bitrate_bps = j.at("mean_delivered_bitrate_bps").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("summary", e.what());
  }
}

namespace {

constexpr std::string_view kTraceHeader =
    "request_id,issue_time_s,client_id,channel,segment,rung,status,action,source,transcode_source_rung,"
    "attempts,est_transmission_s,est_computation_s,transmission_s,computation_s,failed_attempt_s,"
    "serving_latency_s,delivered_vmaf,stall_contribution_s,transcode_site,transcode_device,transcode_job_s,"
    "transcoder_playing";

void put(std::ostream& out, double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, p - buf);
}

template <typename T>
T field(const std::vector<std::string>& cols, std::size_t i, const char* name) {
  const std::string& s = cols.at(i);
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(name, "bad value '" + s + "'");
  return v;
}

}  // namespace

void write_trace_csv(std::ostream& out, std::span<const RequestRecord> trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace) {
    out << r.request_id << ',';
    put(out, r.issue_time_s);
    out << ',' << r.client_id << ',' << r.ref.channel_id << ',' << r.ref.segment_index << ',' << r.ref.rung_index
        << ',' << to_string(r.status) << ',' << action_number(r.action) << ',' << r.source << ','
        << (r.transcode_source_rung ? *r.transcode_source_rung : -1) << ',' << r.attempts;
    for (double v : {r.est_transmission_s, r.est_computation_s, r.transmission_s, r.computation_s,
                     r.failed_attempt_s, r.serving_latency_s, r.delivered_vmaf, r.stall_contribution_s}) {
      out << ',';
      put(out, v);
    }
    out << ',' << to_string(r.transcode_site) << ',' << to_string(r.transcode_device) << ',';
    put(out, r.transcode_job_s);
    out << ',' << (r.transcoder_playing ? 1 : 0) << '\n';
  }
}

std::vector<RequestRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw ParseError("header", "unexpected trace header");
  std::vector<RequestRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) c.push_back(item);
    if (c.size() != 23) throw ParseError("row", "expected 23 columns");
    RequestRecord r;
    r.request_id = field<std::uint64_t>(c, 0, "request_id");
    r.issue_time_s = field<double>(c, 1, "issue_time_s");
    r.client_id = field<NodeId>(c, 2, "client_id");
    r.ref.channel_id = field<int>(c, 3, "channel");
    r.ref.segment_index = field<std::int64_t>(c, 4, "segment");
    r.ref.rung_index = field<int>(c, 5, "rung");
    if (c[6] == "served") r.status = RequestStatus::Served;
    else if (c[6] == "failed") r.status = RequestStatus::Failed;
    else throw ParseError("status", "bad value '" + c[6] + "'");
    const int action = field<int>(c, 7, "action");
    if (action < 1 || action > kActionCount) throw ParseError("action", "out of range");
    r.action = action_from_number(action);
    r.source = field<NodeId>(c, 8, "source");
    if (int rung = field<int>(c, 9, "transcode_source_rung"); rung >= 0) r.transcode_source_rung = rung;
    r.attempts = field<int>(c, 10, "attempts");
    r.est_transmission_s = field<double>(c, 11, "est_transmission_s");
    r.est_computation_s = field<double>(c, 12, "est_computation_s");
    r.transmission_s = field<double>(c, 13, "transmission_s");
    r.computation_s = field<double>(c, 14, "computation_s");
    r.failed_attempt_s = field<double>(c, 15, "failed_attempt_s");
    r.serving_latency_s = field<double>(c, 16, "serving_latency_s");
    r.delivered_vmaf = field<double>(c, 17, "delivered_vmaf");
    r.stall_contribution_s = field<double>(c, 18, "stall_contribution_s");
    if (c[19] == "none") r.transcode_site = TranscodeSite::None;
    else if (c[19] == "edge") r.transcode_site = TranscodeSite::Edge;
    else if (c[19] == "peer") r.transcode_site = TranscodeSite::Peer;
    else throw ParseError("transcode_site", "bad value '" + c[19] + "'");
    if (c[20] == "pc") r.transcode_device = DeviceClass::Pc;
    else if (c[20] == "mobile") r.transcode_device = DeviceClass::Mobile;
    else if (c[20] == "edge") r.transcode_device = DeviceClass::Edge;
    else throw ParseError("transcode_device", "bad value '" + c[20] + "'");
    r.transcode_job_s = field<double>(c, 21, "transcode_job_s");
    r.transcoder_playing = field<int>(c, 22, "transcoder_playing") != 0;
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

struct Fnv {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

}  // namespace

std::uint64_t trace_hash(std::span<const RequestRecord> trace) {
  Fnv f;
  for (const auto& r : trace) {
    f.u64(r.request_id);
    f.f64(r.issue_time_s);
    f.u64(r.client_id);
    f.u64(static_cast<std::uint64_t>(r.ref.channel_id));
    f.u64(static_cast<std::uint64_t>(r.ref.segment_index));
    f.u64(static_cast<std::uint64_t>(r.ref.rung_index));
    f.u64(static_cast<std::uint64_t>(r.status));
    f.u64(static_cast<std::uint64_t>(action_number(r.action)));
    f.u64(r.source);
    f.u64(static_cast<std::uint64_t>(r.transcode_source_rung.value_or(-1)));
    f.u64(static_cast<std::uint64_t>(r.attempts));
    for (double v : {r.est_transmission_s, r.est_computation_s, r.transmission_s, r.computation_s,
                     r.failed_attempt_s, r.serving_latency_s, r.delivered_vmaf, r.stall_contribution_s,
                     r.transcode_job_s})
      f.f64(v);
    f.u64(static_cast<std::uint64_t>(r.transcode_site));
    f.u64(static_cast<std::uint64_t>(r.transcode_device));
    f.u64(r.transcoder_playing ? 1 : 0);
  }
  return f.h;
}

}  // namespace hybridcdn
