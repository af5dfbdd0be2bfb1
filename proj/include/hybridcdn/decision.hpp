#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "hybridcdn/cost_models.hpp"
#include "hybridcdn/media.hpp"
#include "hybridcdn/registry.hpp"

namespace hybridcdn {

/// The seven ways the edge tracker can serve a segment request.
enum class Action : int {
  P2PFetch = 1,              // adjacent peer holds the exact rung
  P2PTranscode = 2,          // adjacent peer transcodes from a higher rung
  VtsFetch = 3,              // edge cache holds the exact rung
  VtsTranscode = 4,          // edge transcodes from a cached higher rung
  CdnFetchVtsTranscode = 5,  // higher rung from a CDN, transcoded at the edge
  CdnFetch = 6,
  OriginFetch = 7,
};

inline constexpr int kActionCount = 7;

inline constexpr int action_number(Action a) { return static_cast<int>(a); }
inline constexpr Action action_from_number(int n) { return static_cast<Action>(n); }
inline constexpr bool is_transcode(Action a) {
  return a == Action::P2PTranscode || a == Action::VtsTranscode || a == Action::CdnFetchVtsTranscode;
}
std::string_view to_string(Action a);

class ActionSet {
 public:
  constexpr ActionSet() = default;
  constexpr ActionSet(std::initializer_list<Action> actions) {
    for (Action a : actions) insert(a);
  }
  static constexpr ActionSet all() { return ActionSet(0b1111'1110); }

  constexpr bool contains(Action a) const { return (bits_ >> action_number(a)) & 1u; }
  constexpr void insert(Action a) { bits_ |= static_cast<std::uint8_t>(1u << action_number(a)); }
  constexpr void erase(Action a) { bits_ &= static_cast<std::uint8_t>(~(1u << action_number(a))); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool subset_of(ActionSet other) const { return (bits_ & ~other.bits_) == 0; }
  friend constexpr bool operator==(ActionSet, ActionSet) = default;

 private:
  constexpr explicit ActionSet(std::uint8_t bits) : bits_(bits) {}
  std::uint8_t bits_ = 0;
};

/// The full system and the four baselines that restrict its action set.
enum class Policy { Full, Noh, Seh, Nth, Ect };

ActionSet policy_actions(Policy policy);
std::string_view to_string(Policy policy);
Policy parse_policy(std::string_view name);  // throws std::invalid_argument
inline constexpr Policy kAllPolicies[] = {Policy::Full, Policy::Ect, Policy::Nth, Policy::Seh, Policy::Noh};

enum class SelectionRule {
  MinServingTime,  // argmin of estimated total, ties to the lower action number
  StrictPriority,  // first feasible, reachable action in numbering order
};

std::string_view to_string(SelectionRule rule);
SelectionRule parse_selection_rule(std::string_view name);

struct Decision {
  Action action = Action::OriginFetch;
  NodeId source = 0;
  std::optional<int> transcode_source_rung;  // set iff is_transcode(action)
  double est_transmission_s = 0.0;
  double est_computation_s = 0.0;

  double est_total_s() const { return est_transmission_s + est_computation_s; }
};

struct Request {
  SegmentRef ref;
  NodeView requester;  // available_bps = requester's downlink share
};

struct EngineParams {
  double battery_threshold_pct = 20.0;  // peer transcodes only above this
  double battery_budget_pct = 2.0;      // per-session transcode battery allowance
  SelectionRule selection = SelectionRule::MinServingTime;
};

/// Everything besides the registry that a decision depends on.
struct DecisionContext {
  const Ladder* ladder = nullptr;
  double segment_duration_s = 2.0;
  const CostTables* tables = nullptr;
  EngineParams params;

  std::int64_t bytes_at(int rung) const;
};

/// Peers the requester may be served by: same group, not itself, and never a
/// leecher when the requester is a seeder.
bool is_adjacent_source(const NodeView& requester, const NodeView& candidate);

/// At most one candidate per action, estimates left at zero. Action 7 is
/// always present.
std::vector<Decision> feasible_candidates(const Request& request, const Registry& registry,
                                          const DecisionContext& ctx);

/// Fills est_transmission_s and est_computation_s. Throws UnreachableSource
/// when a hop has no bandwidth share.
Decision estimate_serving_time(Decision candidate, const Request& request, const Registry& registry,
                               const DecisionContext& ctx);

/// Best plan among candidates allowed by the policy and not excluded.
/// Unreachable candidates are skipped. Throws std::logic_error if nothing
/// remains, which can only happen when action 7 is excluded.
Decision decide(const Request& request, const Registry& registry, Policy policy, const DecisionContext& ctx,
                ActionSet excluded = {});

/// Marks the failed action as excluded and decides again. Each call removes
/// one action, so a request re-decides at most kActionCount - 1 times before
/// reaching the origin.
Decision on_failure_redecide(const Request& request, const Registry& registry, Policy policy,
                             const DecisionContext& ctx, ActionSet& excluded, const Decision& failed);

}  // namespace hybridcdn
