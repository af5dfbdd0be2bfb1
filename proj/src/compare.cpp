#include "hybridcdn/compare.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "hybridcdn/errors.hpp"
#include "hybridcdn/simulator.hpp"

namespace hybridcdn {

namespace {

constexpr std::string_view kHeader = "policy,metric,mean,stdev,n";

std::string fmt(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double value_of(const MetricsSummary& s, const std::string& metric) {
  for (const auto& f : metric_fields(s))
    if (f.name == metric) return f.value;
  throw std::invalid_argument("unknown metric '" + metric + "'");
}

}  // namespace

double Comparison::mean(const std::string& policy, const std::string& metric) const {
  for (const auto& r : rows)
    if (r.policy == policy && r.metric == metric) return r.mean;
  throw std::out_of_range("no row for " + policy + "/" + metric);
}

Comparison tabulate(const std::vector<std::string>& order, const std::map<std::string, std::vector<MetricsSummary>>& runs,
                    std::vector<std::uint64_t> seeds) {
  Comparison c;
  c.seeds = std::move(seeds);
  c.runs = runs;
  const auto names = metric_names();
  for (const auto& policy : order) {
    const auto& list = runs.at(policy);
    for (const auto& metric : names) {
      ComparisonRow row{policy, metric, 0.0, 0.0, static_cast<int>(list.size())};
      for (const auto& s : list) row.mean += value_of(s, metric);
      if (!list.empty()) row.mean /= static_cast<double>(list.size());
      if (list.size() > 1) {
        double ss = 0.0;
        for (const auto& s : list) ss += std::pow(value_of(s, metric) - row.mean, 2);
        row.stdev = std::sqrt(ss / static_cast<double>(list.size() - 1));
      }
      c.rows.push_back(row);
    }
  }
  for (const auto& metric : names)
    for (std::size_t i = 0; i < order.size(); ++i)
      for (std::size_t j = i + 1; j < order.size(); ++j) {
        const auto& a = runs.at(order[i]);
        const auto& b = runs.at(order[j]);
        PairwiseOrdering o{metric, order[i], order[j]};
        o.n = static_cast<int>(std::min(a.size(), b.size()));
        for (int k = 0; k < o.n; ++k) {
          const double x = value_of(a[k], metric), y = value_of(b[k], metric);
          if (x < y) ++o.first_lower;
          if (x == y) ++o.ties;
          o.mean_difference += x - y;
        }
        if (o.n > 0) o.mean_difference /= o.n;
        c.orderings.push_back(o);
      }
  return c;
}

Comparison compare_policies(const ScenarioConfig& base, std::span<const Policy> policies, int repetitions) {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (policies.empty()) throw ConfigError("at least one policy is required");
  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < repetitions; ++r) seeds.push_back(base.seed + static_cast<std::uint64_t>(r));
  std::vector<std::string> order;
  std::map<std::string, std::vector<MetricsSummary>> runs;
  for (Policy p : policies) {
    const std::string name(to_string(p));
    if (runs.contains(name)) continue;
    order.push_back(name);
    auto& list = runs[name];
    for (std::uint64_t seed : seeds) {
      ScenarioConfig cfg = base;
      cfg.policy = p;
      cfg.seed = seed;
      list.push_back(run(cfg).summary);
    }
  }
  return tabulate(order, runs, seeds);
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
  out << kHeader << '\n';
  for (const auto& r : rows) out << r.policy << ',' << r.metric << ',' << fmt(r.mean) << ',' << fmt(r.stdev) << ',' << r.n << '\n';
}

std::vector<ComparisonRow> read_comparison_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw ParseError("header", "expected '" + std::string(kHeader) + "'");
  std::vector<ComparisonRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) c.push_back(item);
    if (c.size() != 5) throw ParseError("row", "expected 5 columns in '" + line + "'");
    ComparisonRow r{c[0], c[1]};
    auto num = [&](const std::string& s, auto& v, const char* key) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(key, "bad value '" + s + "'");
    };
    num(c[2], r.mean, "mean");
    num(c[3], r.stdev, "stdev");
    num(c[4], r.n, "n");
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_orderings_csv(std::ostream& out, std::span<const PairwiseOrdering> orderings) {
  out << "metric,first,second,first_lower,ties,n,mean_difference\n";
  for (const auto& o : orderings)
    out << o.metric << ',' << o.first << ',' << o.second << ',' << o.first_lower << ',' << o.ties << ',' << o.n << ','
        << fmt(o.mean_difference) << '\n';
}

void write_plot_data_json(std::ostream& out, std::span<const ComparisonRow> rows) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& r : rows) {
    auto& series = j[r.metric];
    series["policy"].push_back(r.policy);
    series["mean"].push_back(r.mean);
    series["stdev"].push_back(r.stdev);
    series["n"].push_back(r.n);
  }
  out << j.dump(2) << '\n';
}

}  // namespace hybridcdn
