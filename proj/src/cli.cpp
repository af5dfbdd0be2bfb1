#include "hybridcdn/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "hybridcdn/compare.hpp"
#include "hybridcdn/errors.hpp"
#include "hybridcdn/scenario.hpp"
#include "hybridcdn/simulator.hpp"

namespace hybridcdn {

namespace {

constexpr int kUsage = 2;
constexpr int kConfig = 1;

std::vector<Policy> parse_policy_list(const std::string& list) {
  std::vector<Policy> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(parse_policy(item));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (out.empty()) throw ConfigError("--policies is empty");
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  return f;
}

int validate_tables(const std::string& path, std::ostream& out, std::ostream& err) {
  std::ifstream in(path);
  if (!in) {
    err << "cannot open " << path << '\n';
    return kConfig;
  }
  const CostTables file = CostTables::from_csv(in);
  const CostTables embedded = CostTables::published();
  int mismatches = 0;
  const auto& ft = file.transcode_entries();
  const auto& et = embedded.transcode_entries();
  for (const auto& e : et) {
    bool found = false;
    for (const auto& f : ft)
      if (f.source_bps == e.source_bps && f.target_bps == e.target_bps && f.device == e.device) {
        found = true;
        if (f.total_time_s != e.total_time_s || f.vmaf != e.vmaf) {
          ++mismatches;
          err << "transcode " << e.source_bps << "->" << e.target_bps << ' ' << to_string(e.device) << ": file ("
              << f.total_time_s << " s, " << f.vmaf << ") vs embedded (" << e.total_time_s << " s, " << e.vmaf << ")\n";
        }
      }
    if (!found) {
      ++mismatches;
      err << "transcode " << e.source_bps << "->" << e.target_bps << ' ' << to_string(e.device) << ": missing in file\n";
    }
  }
  if (ft.size() != et.size()) {
    ++mismatches;
    err << "transcode entry count: file " << ft.size() << " vs embedded " << et.size() << '\n';
  }
  const auto& fp = file.power_entries();
  const auto& ep = embedded.power_entries();
  for (const auto& e : ep) {
    bool found = false;
    for (const auto& f : fp)
      if (f.operation == e.operation && f.profile_source_bps == e.profile_source_bps &&
          f.profile_target_bps == e.profile_target_bps) {
        found = true;
        if (!(f == e)) {
          ++mismatches;
          err << "power " << to_string(e.operation) << ' ' << e.profile_source_bps << "->" << e.profile_target_bps
              << ": file (" << f.power_kwh_e3 << ", " << f.battery_pct << "%) vs embedded (" << e.power_kwh_e3 << ", "
              << e.battery_pct << "%)\n";
        }
      }
    if (!found) {
      ++mismatches;
      err << "power " << to_string(e.operation) << ' ' << e.profile_source_bps << "->" << e.profile_target_bps
          << ": missing in file\n";
    }
  }
  if (fp.size() != ep.size()) {
    ++mismatches;
    err << "power entry count: file " << fp.size() << " vs embedded " << ep.size() << '\n';
  }
  if (mismatches > 0) {
    err << mismatches << " mismatch(es)\n";
    return kConfig;
  }
  out << "tables match: " << et.size() << " transcode entries, " << ep.size() << " power rows\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid P2P-CDN live streaming simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;

  auto* run_cmd = app.add_subcommand("run", "Run one scenario; writes summary.json and trace.csv");
  run_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  run_cmd->add_option("--out", out_path, "Output directory (default: current directory)");
  run_cmd->add_option("--seed", seed, "Override the scenario seed");

  std::string policies = "FULL,ECT,NTH,SEH,NOH";
  int reps = 5;
  std::string orderings_path;
  auto* cmp_cmd = app.add_subcommand("compare", "Run policies on paired seeds; writes the comparison CSV");
  cmp_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  cmp_cmd->add_option("--policies", policies, "Comma-separated policy names");
  cmp_cmd->add_option("--reps", reps, "Seeds per policy")->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--seed", seed, "First seed (default: scenario seed)");
  cmp_cmd->add_option("--out", out_path, "Comparison CSV path (default: stdout)");
  cmp_cmd->add_option("--orderings", orderings_path, "Also write pairwise orderings CSV here");

  std::string tables_path = std::string(HYBRIDCDN_DATA_DIR) + "/cost_tables.csv";
  auto* val_cmd = app.add_subcommand("validate-tables", "Diff the embedded tables against the checked-in transcription");
  val_cmd->add_option("--file", tables_path, "Transcription CSV");

  std::string comparison_path;
  auto* plot_cmd = app.add_subcommand("emit-plot-data", "Per-metric series from a comparison CSV, as JSON");
  plot_cmd->add_option("comparison", comparison_path, "Comparison CSV")->required();
  plot_cmd->add_option("--out", out_path, "JSON path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << app.help();
    return kUsage;
  }

  try {
    if (*run_cmd) {
      ScenarioConfig cfg = load_scenario(scenario_path);
      if (seed) cfg.seed = *seed;
      const RunResult r = run(cfg);
      const std::filesystem::path dir = out_path.empty() ? std::filesystem::path(".") : std::filesystem::path(out_path);
      std::filesystem::create_directories(dir);
      auto summary = open_out(dir / "summary.json");
      write_summary_json(summary, r.summary);
      auto trace = open_out(dir / "trace.csv");
      write_trace_csv(trace, r.trace);
      out << "requests " << r.summary.requests << ", mean latency " << r.summary.mean_serving_latency_s
          << " s, mean qoe " << r.summary.mean_qoe << ", trace hash " << std::hex << r.trace_hash << std::dec << '\n';
      return 0;
    }
    if (*cmp_cmd) {
      ScenarioConfig cfg = load_scenario(scenario_path);
      if (seed) cfg.seed = *seed;
      const auto list = parse_policy_list(policies);
      const Comparison c = compare_policies(cfg, list, reps);
      if (out_path.empty()) {
        write_comparison_csv(out, c.rows);
      } else {
        auto f = open_out(out_path);
        write_comparison_csv(f, c.rows);
      }
      if (!orderings_path.empty()) {
        auto f = open_out(orderings_path);
        write_orderings_csv(f, c.orderings);
      }
      return 0;
    }
    if (*val_cmd) return validate_tables(tables_path, out, err);
    if (*plot_cmd) {
      std::ifstream in(comparison_path);
      if (!in) throw ConfigError("cannot open '" + comparison_path + "'");
      const auto rows = read_comparison_csv(in);
      if (out_path.empty()) {
        write_plot_data_json(out, rows);
      } else {
        auto f = open_out(out_path);
        write_plot_data_json(f, rows);
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kConfig;
  }
  return kUsage;
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace hybridcdn
