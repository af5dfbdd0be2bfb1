#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "hybridcdn/cost_models.hpp"
#include "hybridcdn/media.hpp"
#include "hybridcdn/metrics.hpp"
#include "hybridcdn/scenario.hpp"

namespace hybridcdn {

/// Engine bookkeeping that the trace alone does not show.
struct RunCounters {
  std::uint64_t events = 0;
  std::uint64_t requests_issued = 0;
  std::uint64_t requests_completed = 0;  // served + failed, each counted once
  std::uint64_t stale_source_failures = 0;
  std::uint64_t departure_failures = 0;
  std::uint64_t abandoned = 0;  // client left with the request in flight
  std::uint64_t time_regressions = 0;
  std::uint64_t coherence_violations = 0;  // cache hit served without the entry present
  std::uint64_t reports_applied = 0;
  int max_redecisions = 0;
  double max_link_utilization = 0.0;
};

struct RunResult {
  MetricsSummary summary;
  std::vector<RequestRecord> trace;  // ordered by request_id
  std::uint64_t trace_hash = 0;
  RunCounters counters;
};

/// Scenario tables: the checked-in file when cost_tables is set, else the
/// built-in transcription, with the scenario's edge parameters applied.
CostTables scenario_tables(const ScenarioConfig& config);

/// Runs one scenario to completion. Requests issued before duration_s are
/// carried to completion. Throws ConfigError before any event runs.
RunResult run(const ScenarioConfig& config);

/// One step of the arrival process: next arrival time and that peer's
/// session length.
struct ChurnArrival {
  double time_s = 0.0;
  double session_s = std::numeric_limits<double>::infinity();
};
ChurnArrival churn_step(Rng& rng, const ChurnParams& params, double now_s);

struct PeerSession {
  double join_s = 0.0;
  double leave_s = std::numeric_limits<double>::infinity();
};

/// All peer sessions of a run, in join order. Without churn, peer_count
/// sessions join uniformly in [0, join_spread_s] and never leave. With
/// churn, Poisson arrivals join while fewer than peer_count are active.
std::vector<PeerSession> churn_schedule(Rng& rng, const ChurnParams& params, int peer_count, double duration_s);

}  // namespace hybridcdn
