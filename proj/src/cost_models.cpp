#include "hybridcdn/cost_models.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "hybridcdn/errors.hpp"

namespace hybridcdn {

std::string_view to_string(DeviceClass device) {
  switch (device) {
    case DeviceClass::Pc: return "pc";
    case DeviceClass::Mobile: return "mobile";
    case DeviceClass::Edge: return "edge";
  }
  return "?";
}

std::string_view to_string(PowerOperation op) {
  switch (op) {
    case PowerOperation::Play: return "PLY";
    case PowerOperation::Transcode: return "TR";
    case PowerOperation::TranscodePlay: return "TR+PLY";
  }
  return "?";
}

namespace {

constexpr std::int64_t kProfileLowSource = 791'000;
constexpr std::int64_t kProfileLowTarget = 262'000;
constexpr std::int64_t kProfileHighSource = 4'219'000;
constexpr std::int64_t kProfileHighTarget = 2'484'000;

struct PublishedTranscodeRow {
  std::int64_t source_bps, target_bps;
  double pc_time_s, pc_vmaf, mobile_time_s, mobile_vmaf;
};

constexpr PublishedTranscodeRow kTranscodeRows[] = {
    {4'219'000, 89'000, 4.31, 15.38, 15.98, 13.75},
    {4'219'000, 262'000, 5.33, 44.61, 18.32, 42.13},
    {4'219'000, 791'000, 11.74, 76.21, 39.28, 73.14},
    {4'219'000, 2'484'000, 20.44, 93.33, 74.91, 91.53},
    {2'484'000, 89'000, 3.80, 14.35, 16.55, 13.01},
    {2'484'000, 262'000, 4.83, 42.27, 18.82, 40.02},
    {2'484'000, 791'000, 11.36, 71.56, 39.76, 69.06},
    {791'000, 89'000, 2.05, 12.21, 10.43, 11.24},
    {791'000, 262'000, 3.35, 36.33, 14.81, 34.76},
    {262'000, 89'000, 1.28, 11.01, 5.85, 10.32},
};

struct PublishedPowerRow {
  PowerOperation operation;
  double low_kwh_e3, low_battery_pct, high_kwh_e3, high_battery_pct;
};

constexpr PublishedPowerRow kPowerRows[] = {
    {PowerOperation::Play, 119, 0.39, 152, 0.49},
    {PowerOperation::Transcode, 130, 0.42, 352, 1.14},
    {PowerOperation::TranscodePlay, 237, 0.77, 479, 1.55},
};

constexpr std::string_view kTranscodeSection = "[transcode]";
constexpr std::string_view kTranscodeHeader =
    "source_bps,target_bps,pc_time_s,pc_vmaf,mobile_time_s,mobile_vmaf";
constexpr std::string_view kPowerSection = "[power]";
constexpr std::string_view kPowerHeader =
    "operation,low_profile_kwh_e3,low_profile_battery_pct,high_profile_kwh_e3,high_profile_battery_pct";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& key) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(key, "not a number: '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s, const std::string& key) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(key, "not an integer: '" + s + "'");
  return v;
}

std::string format_value(double v) {
  // Shortest text that parses back to the same double.
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

PowerOperation parse_operation(const std::string& s) {
  if (s == "PLY") return PowerOperation::Play;
  if (s == "TR") return PowerOperation::Transcode;
  if (s == "TR+PLY") return PowerOperation::TranscodePlay;
  throw ParseError("operation", "unknown power operation '" + s + "'");
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

}  // namespace

CostTables::CostTables(std::vector<TranscodeEntry> transcode, std::vector<PowerEntry> power,
                       double edge_power_watts, double edge_speed_factor)
    : transcode_(std::move(transcode)),
      power_(std::move(power)),
      edge_power_watts_(edge_power_watts),
      edge_speed_factor_(edge_speed_factor) {
  if (!(edge_power_watts_ >= 0.0)) throw ConfigError("edge_power_watts must be >= 0");
  if (!(edge_speed_factor_ > 0.0)) throw ConfigError("edge_speed_factor must be > 0");
  for (const auto& e : transcode_) {
    if (e.source_bps <= e.target_bps)
      throw ConfigError("transcode entry must have source bitrate above target bitrate");
    if (e.device == DeviceClass::Edge) throw ConfigError("transcode entries are measured on pc or mobile only");
  }
}

CostTables CostTables::published() {
  std::vector<TranscodeEntry> transcode;
  for (const auto& row : kTranscodeRows) {
    transcode.push_back({row.source_bps, row.target_bps, DeviceClass::Pc, row.pc_time_s, row.pc_vmaf});
    transcode.push_back({row.source_bps, row.target_bps, DeviceClass::Mobile, row.mobile_time_s, row.mobile_vmaf});
  }
  std::vector<PowerEntry> power;
  for (const auto& row : kPowerRows) {
    power.push_back({row.operation, kProfileLowSource, kProfileLowTarget, row.low_kwh_e3, row.low_battery_pct});
    power.push_back({row.operation, kProfileHighSource, kProfileHighTarget, row.high_kwh_e3, row.high_battery_pct});
  }
  return CostTables(std::move(transcode), std::move(power));
}

CostTables CostTables::with_edge(double edge_power_watts, double edge_speed_factor) const {
  return CostTables(transcode_, power_, edge_power_watts, edge_speed_factor);
}

CostTables CostTables::from_csv(std::istream& in, double edge_power_watts, double edge_speed_factor) {
  enum class Section { None, Transcode, Power } section = Section::None;
  bool expect_header = false;
  std::vector<TranscodeEntry> transcode;
  std::vector<PowerEntry> power;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line == kTranscodeSection) {
      section = Section::Transcode;
      expect_header = true;
      continue;
    }
    if (line == kPowerSection) {
      section = Section::Power;
      expect_header = true;
      continue;
    }
    const std::string where = "line " + std::to_string(line_no);
    if (expect_header) {
      const auto want = section == Section::Transcode ? kTranscodeHeader : kPowerHeader;
      if (line != want) throw ParseError(where, "unexpected header '" + line + "'");
      expect_header = false;
      continue;
    }
    const auto cells = split_csv(line);
    if (section == Section::Transcode) {
      if (cells.size() != 6) throw ParseError(where, "transcode row needs 6 columns");
      const auto src = parse_int(cells[0], "source_bps");
      const auto tgt = parse_int(cells[1], "target_bps");
      transcode.push_back({src, tgt, DeviceClass::Pc, parse_double(cells[2], "pc_time_s"),
                           parse_double(cells[3], "pc_vmaf")});
      transcode.push_back({src, tgt, DeviceClass::Mobile, parse_double(cells[4], "mobile_time_s"),
                           parse_double(cells[5], "mobile_vmaf")});
    } else if (section == Section::Power) {
      if (cells.size() != 5) throw ParseError(where, "power row needs 5 columns");
      const auto op = parse_operation(cells[0]);
      power.push_back({op, kProfileLowSource, kProfileLowTarget, parse_double(cells[1], "low_profile_kwh_e3"),
                       parse_double(cells[2], "low_profile_battery_pct")});
      power.push_back({op, kProfileHighSource, kProfileHighTarget, parse_double(cells[3], "high_profile_kwh_e3"),
                       parse_double(cells[4], "high_profile_battery_pct")});
    } else {
      throw ParseError(where, "row outside of a [transcode] or [power] section");
    }
  }
  try {
    return CostTables(std::move(transcode), std::move(power), edge_power_watts, edge_speed_factor);
  } catch (const ConfigError& e) {
    throw ParseError("", e.what());
  }
}

void CostTables::write_csv(std::ostream& out) const {
  out << kTranscodeSection << '\n' << kTranscodeHeader << '\n';
  for (const auto& pc : transcode_) {
    if (pc.device != DeviceClass::Pc) continue;
    const auto& mob = find_entry(pc.source_bps, pc.target_bps, DeviceClass::Mobile);
    out << pc.source_bps << ',' << pc.target_bps << ',' << format_value(pc.total_time_s) << ','
        << format_value(pc.vmaf) << ',' << format_value(mob.total_time_s) << ',' << format_value(mob.vmaf) << '\n';
  }
  out << kPowerSection << '\n' << kPowerHeader << '\n';
  for (auto op : {PowerOperation::Play, PowerOperation::Transcode, PowerOperation::TranscodePlay}) {
    const PowerEntry* low = nullptr;
    const PowerEntry* high = nullptr;
    for (const auto& p : power_) {
      if (p.operation != op) continue;
      (p.profile_target_bps == kProfileLowTarget ? low : high) = &p;
    }
    if (!low || !high) continue;
    out << to_string(op) << ',' << format_value(low->power_kwh_e3) << ',' << format_value(low->battery_pct) << ','
        << format_value(high->power_kwh_e3) << ',' << format_value(high->battery_pct) << '\n';
  }
}

const TranscodeEntry& CostTables::find_entry(std::int64_t source_bps, std::int64_t target_bps,
                                             DeviceClass device) const {
  const DeviceClass column = device == DeviceClass::Edge ? DeviceClass::Pc : device;
  for (const auto& e : transcode_)
    if (e.source_bps == source_bps && e.target_bps == target_bps && e.device == column) return e;
  throw ConfigError("no transcode measurement for " + std::to_string(source_bps) + " -> " +
                    std::to_string(target_bps) + " on " + std::string(to_string(column)));
}

void CostTables::validate_coverage(const Ladder& ladder) const {
  for (const auto& hi : ladder)
    for (const auto& lo : ladder)
      if (hi.bitrate_bps > lo.bitrate_bps) {
        find_entry(hi.bitrate_bps, lo.bitrate_bps, DeviceClass::Pc);
        find_entry(hi.bitrate_bps, lo.bitrate_bps, DeviceClass::Mobile);
      }
}

namespace {
void check_direction(const Representation& source, const Representation& target) {
  if (source.bitrate_bps <= target.bitrate_bps)
    throw InvalidTranscodeDirection("transcode source bitrate must exceed target bitrate");
}
}  // namespace

double CostTables::transcode_time_per_segment(const Representation& source, const Representation& target,
                                              DeviceClass device) const {
  check_direction(source, target);
  const double per_segment =
      find_entry(source.bitrate_bps, target.bitrate_bps, device).total_time_s / kTranscodeReferenceSegments;
  return device == DeviceClass::Edge ? per_segment / edge_speed_factor_ : per_segment;
}

double CostTables::transcoded_vmaf(const Representation& source, const Representation& target,
                                   DeviceClass device) const {
  check_direction(source, target);
  return find_entry(source.bitrate_bps, target.bitrate_bps, device).vmaf;
}

const PowerEntry& CostTables::power_profile_for(const Representation& source, const Representation& target,
                                                PowerOperation operation) const {
  check_direction(source, target);
  const PowerEntry* best = nullptr;
  double best_distance = std::numeric_limits<double>::infinity();
  for (const auto& p : power_) {
    if (p.operation != operation) continue;
    const double d = std::abs(std::log(static_cast<double>(target.bitrate_bps) /
                                       static_cast<double>(p.profile_target_bps)));
    if (d < best_distance) {
      best_distance = d;
      best = &p;
    }
  }
  if (!best) throw ConfigError("no power profile for operation " + std::string(to_string(operation)));
  return *best;
}

PeerEnergy CostTables::peer_transcode_battery_per_segment(const Representation& source,
                                                          const Representation& target, bool playing) const {
  const auto& row =
      power_profile_for(source, target, playing ? PowerOperation::TranscodePlay : PowerOperation::Transcode);
  return {row.power_kwh_e3 * 1e-3 / kPowerReferenceSegments, row.battery_pct / kPowerReferenceSegments};
}

double CostTables::edge_transcode_energy(double job_time_s) const {
  if (!(job_time_s >= 0.0)) throw std::invalid_argument("edge_transcode_energy: job time must be >= 0");
  return job_time_s * edge_power_watts_ / 3.6e6;
}

double transmission_time(std::int64_t bytes, double available_bps) {
  if (!(available_bps > 0.0)) throw UnreachableSource("hop has no available bandwidth");
  return static_cast<double>(bytes) * 8.0 / available_bps;
}

}  // namespace hybridcdn
