#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hybridcdn/decision.hpp"
#include "hybridcdn/metrics.hpp"
#include "hybridcdn/scenario.hpp"

namespace hybridcdn {

/// Long format: one row per (policy, metric).
struct ComparisonRow {
  std::string policy;
  std::string metric;
  double mean = 0.0;
  double stdev = 0.0;  // sample standard deviation, 0 for a single run
  int n = 0;

  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

/// How often `first` came out below `second` on the same seed.
struct PairwiseOrdering {
  std::string metric;
  std::string first;
  std::string second;
  int first_lower = 0;
  int ties = 0;
  int n = 0;
  double mean_difference = 0.0;  // mean(first - second)
};

struct Comparison {
  std::vector<std::uint64_t> seeds;
  std::map<std::string, std::vector<MetricsSummary>> runs;  // by policy name, seed order
  std::vector<ComparisonRow> rows;                          // policies in input order x metric_names()
  std::vector<PairwiseOrdering> orderings;

  double mean(const std::string& policy, const std::string& metric) const;
};

/// Runs every policy on seeds base.seed, base.seed + 1, ... (paired design).
Comparison compare_policies(const ScenarioConfig& base, std::span<const Policy> policies, int repetitions);

/// Table from already finished runs; runs[p][r] must share a seed across p.
Comparison tabulate(const std::vector<std::string>& policy_order,
                    const std::map<std::string, std::vector<MetricsSummary>>& runs,
                    std::vector<std::uint64_t> seeds = {});

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows);
std::vector<ComparisonRow> read_comparison_csv(std::istream& in);  // throws ParseError

void write_orderings_csv(std::ostream& out, std::span<const PairwiseOrdering> orderings);

/// Per-metric series for plotting: {metric: {policy: [..], mean: [..], stdev: [..]}}.
void write_plot_data_json(std::ostream& out, std::span<const ComparisonRow> rows);

}  // namespace hybridcdn
