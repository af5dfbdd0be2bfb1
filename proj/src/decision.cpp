#include "hybridcdn/decision.hpp"

#include <stdexcept>

#include "hybridcdn/errors.hpp"

namespace hybridcdn {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::P2PFetch: return "p2p-fetch";
    case Action::P2PTranscode: return "p2p-transcode";
    case Action::VtsFetch: return "vts-fetch";
    case Action::VtsTranscode: return "vts-transcode";
    case Action::CdnFetchVtsTranscode: return "cdn-fetch-vts-transcode";
    case Action::CdnFetch: return "cdn-fetch";
    case Action::OriginFetch: return "origin-fetch";
  }
  return "?";
}

ActionSet policy_actions(Policy policy) {
  using enum Action;
  switch (policy) {
    case Policy::Full: return ActionSet::all();
    case Policy::Noh: return {CdnFetch, OriginFetch};
    case Policy::Seh: return {P2PFetch, CdnFetch, OriginFetch};
    case Policy::Nth: return {P2PFetch, VtsFetch, CdnFetch, OriginFetch};
    case Policy::Ect:
      return {P2PFetch, VtsFetch, VtsTranscode, CdnFetchVtsTranscode, CdnFetch, OriginFetch};
  }
  return {};
}

std::string_view to_string(Policy policy) {
  switch (policy) {
    case Policy::Full: return "FULL";
    case Policy::Noh: return "NOH";
    case Policy::Seh: return "SEH";
    case Policy::Nth: return "NTH";
    case Policy::Ect: return "ECT";
  }
  return "?";
}

Policy parse_policy(std::string_view name) {
  for (Policy p : kAllPolicies)
    if (name == to_string(p)) return p;
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

std::string_view to_string(SelectionRule rule) {
  return rule == SelectionRule::MinServingTime ? "min-time" : "strict-priority";
}

SelectionRule parse_selection_rule(std::string_view name) {
  if (name == "min-time") return SelectionRule::MinServingTime;
  if (name == "strict-priority") return SelectionRule::StrictPriority;
  throw std::invalid_argument("unknown selection rule '" + std::string(name) + "'");
}

std::int64_t DecisionContext::bytes_at(int rung) const {
  return segment_bytes(ladder->at(static_cast<std::size_t>(rung)), segment_duration_s);
}

bool is_adjacent_source(const NodeView& requester, const NodeView& candidate) {
  if (candidate.kind != NodeKind::Peer || candidate.node_id == requester.node_id) return false;
  if (candidate.group_id != requester.group_id) return false;
  return !(requester.role == PeerRole::Seeder && candidate.role == PeerRole::Leecher);
}

namespace {

// Earliest join wins; equal join times go to the lower id.
bool more_stable(const NodeView& a, const NodeView& b) {
  if (a.join_time_s != b.join_time_s) return a.join_time_s < b.join_time_s;
  return a.node_id < b.node_id;
}

// Higher share wins; equal shares go to the lower id.
bool better_bandwidth(const NodeView& a, const NodeView& b) {
  if (a.available_bps != b.available_bps) return a.available_bps > b.available_bps;
  return a.node_id < b.node_id;
}

}  // namespace

std::vector<Decision> feasible_candidates(const Request& request, const Registry& registry,
                                          const DecisionContext& ctx) {
  const SegmentRef& ref = request.ref;
  const auto& params = ctx.params;

  const NodeView* fetch_peer = nullptr;
  const NodeView* transcode_peer = nullptr;
  std::optional<int> transcode_peer_rung;
  const NodeView* vts = nullptr;
  const NodeView* exact_cdn = nullptr;
  const NodeView* higher_cdn = nullptr;
  std::optional<int> higher_cdn_rung;
  const NodeView* origin = nullptr;

  for (const auto& [id, node] : registry.nodes()) {
    switch (node.kind) {
      case NodeKind::Peer: {
        if (!is_adjacent_source(request.requester, node) || !(node.available_bps > 0.0)) break;
        if (node.holds(ref) && (!fetch_peer || more_stable(node, *fetch_peer))) fetch_peer = &node;
        if (node.transcode_enabled && node.transcode_slots_free > 0 &&
            node.battery_pct > params.battery_threshold_pct &&
            node.transcode_battery_spent_pct < params.battery_budget_pct) {
          if (auto rung = node.lowest_rung_above(ref); rung && (!transcode_peer || more_stable(node, *transcode_peer))) {
            transcode_peer = &node;
            transcode_peer_rung = rung;
          }
        }
        break;
      }
      case NodeKind::Vts:
        if (!vts) vts = &node;
        break;
      case NodeKind::Cdn:
        if (node.holds(ref) && (!exact_cdn || better_bandwidth(node, *exact_cdn))) exact_cdn = &node;
        if (auto rung = node.lowest_rung_above(ref); rung && (!higher_cdn || better_bandwidth(node, *higher_cdn))) {
          higher_cdn = &node;
          higher_cdn_rung = rung;
        }
        break;
      case NodeKind::Origin:
        if (!origin) origin = &node;
        break;
    }
  }

  std::vector<Decision> out;
  auto add = [&](Action a, NodeId source, std::optional<int> rung = std::nullopt) {
    Decision d;
    d.action = a;
    d.source = source;
    d.transcode_source_rung = rung;
    out.push_back(d);
  };
  if (fetch_peer) add(Action::P2PFetch, fetch_peer->node_id);
  if (transcode_peer) add(Action::P2PTranscode, transcode_peer->node_id, transcode_peer_rung);
  if (vts) {
    if (vts->holds(ref)) add(Action::VtsFetch, vts->node_id);
    if (auto rung = vts->lowest_rung_above(ref)) add(Action::VtsTranscode, vts->node_id, rung);
  }
  if (higher_cdn && vts) add(Action::CdnFetchVtsTranscode, higher_cdn->node_id, higher_cdn_rung);
  if (exact_cdn) add(Action::CdnFetch, exact_cdn->node_id);
  add(Action::OriginFetch, origin ? origin->node_id : 0);
  return out;
}

Decision estimate_serving_time(Decision c, const Request& request, const Registry& registry,
                               const DecisionContext& ctx) {
  const int rung = request.ref.rung_index;
  const std::int64_t bytes = ctx.bytes_at(rung);
  const double last_mile = request.requester.available_bps;

  auto source_view = [&]() -> const NodeView& {
    const NodeView* v = registry.find(c.source);
    if (!v) throw UnreachableSource("source node is not in the registry");
    return *v;
  };
  auto edge_compute = [&](int from_rung) {
    const NodeView& edge = *registry.first_of_kind(NodeKind::Vts);
    const double wait = edge.transcode_queue_length * edge.mean_transcode_job_s;
    return ctx.tables->transcode_time_per_segment(ctx.ladder->at(from_rung), ctx.ladder->at(rung), DeviceClass::Edge) +
           wait;
  };

  c.est_transmission_s = 0.0;
  c.est_computation_s = 0.0;
  switch (c.action) {
    case Action::P2PFetch:
      c.est_transmission_s = transmission_time(bytes, source_view().available_bps);
      break;
    case Action::P2PTranscode: {
      const NodeView& peer = source_view();
      c.est_computation_s = ctx.tables->transcode_time_per_segment(
          ctx.ladder->at(*c.transcode_source_rung), ctx.ladder->at(rung), peer.device);
      c.est_transmission_s = transmission_time(bytes, peer.available_bps);
      break;
    }
    case Action::VtsFetch:
      c.est_transmission_s = transmission_time(bytes, last_mile);
      break;
    case Action::VtsTranscode:
      c.est_computation_s = edge_compute(*c.transcode_source_rung);
      c.est_transmission_s = transmission_time(bytes, last_mile);
      break;
    case Action::CdnFetchVtsTranscode:
      c.est_computation_s = edge_compute(*c.transcode_source_rung);
      c.est_transmission_s = transmission_time(ctx.bytes_at(*c.transcode_source_rung), source_view().available_bps) +
                             transmission_time(bytes, last_mile);
      break;
    case Action::CdnFetch:
    case Action::OriginFetch:
      c.est_transmission_s =
          transmission_time(bytes, source_view().available_bps) + transmission_time(bytes, last_mile);
      break;
  }
  return c;
}

Decision decide(const Request& request, const Registry& registry, Policy policy, const DecisionContext& ctx,
                ActionSet excluded) {
  const ActionSet allowed = policy_actions(policy);
  std::optional<Decision> best;
  for (const Decision& candidate : feasible_candidates(request, registry, ctx)) {
    if (!allowed.contains(candidate.action) || excluded.contains(candidate.action)) continue;
    Decision estimated;
    try {
      estimated = estimate_serving_time(candidate, request, registry, ctx);
    } catch (const UnreachableSource&) {
      continue;
    }
    if (ctx.params.selection == SelectionRule::StrictPriority) return estimated;
    // Candidates arrive in action order, so strict < keeps the lower action on ties.
    if (!best || estimated.est_total_s() < best->est_total_s()) best = estimated;
  }
  if (!best) throw std::logic_error("no reachable candidate for request");
  return *best;
}

Decision on_failure_redecide(const Request& request, const Registry& registry, Policy policy,
                             const DecisionContext& ctx, ActionSet& excluded, const Decision& failed) {
  excluded.insert(failed.action);
  return decide(request, registry, policy, ctx, excluded);
}

}  // namespace hybridcdn
