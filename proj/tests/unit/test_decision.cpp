#include <gtest/gtest.h>

#include <random>

#include "hybridcdn/decision.hpp"
#include "hybridcdn/errors.hpp"
#include "oracles/decision_oracle.hpp"
#include "oracles/random_state.hpp"

using namespace hybridcdn;

namespace {

struct Fixture {
  Ladder ladder = default_ladder();
  CostTables tables = CostTables::published();
  DecisionContext ctx;
  Registry reg;

  Fixture() {
    ctx.ladder = &ladder;
    ctx.tables = &tables;
    NodeView origin;
    origin.node_id = 0;
    origin.kind = NodeKind::Origin;
    origin.available_bps = 50e6;
    reg.upsert(origin);
    NodeView vts;
    vts.node_id = 5;
    vts.kind = NodeKind::Vts;
    reg.upsert(vts);
  }

  NodeView& add(NodeId id, NodeKind kind, double bps, std::vector<SegmentRef> cached = {}) {
    NodeView v;
    v.node_id = id;
    v.kind = kind;
    v.available_bps = bps;
    v.cached = std::move(cached);
    v.transcode_slots_free = 1;
    normalize_cached(v.cached);
    reg.upsert(v);
    return *reg.find_mutable(id);
  }

  static Request request(SegmentRef ref, PeerRole role = PeerRole::Leecher, double down = 20e6) {
    Request r;
    r.ref = ref;
    r.requester.node_id = 99;
    r.requester.kind = NodeKind::Peer;
    r.requester.role = role;
    r.requester.available_bps = down;
    return r;
  }
};

bool has_action(const std::vector<Decision>& c, Action a) {
  for (const auto& d : c)
    if (d.action == a) return true;
  return false;
}

const Decision& find_action(const std::vector<Decision>& c, Action a) {
  for (const auto& d : c)
    if (d.action == a) return d;
  throw std::out_of_range("missing action");
}

}  // namespace

TEST(Policy, ActionSubsets) {
  using A = Action;
  EXPECT_EQ(policy_actions(Policy::Full), ActionSet::all());
  EXPECT_EQ(policy_actions(Policy::Noh), (ActionSet{A::CdnFetch, A::OriginFetch}));
  EXPECT_EQ(policy_actions(Policy::Seh), (ActionSet{A::P2PFetch, A::CdnFetch, A::OriginFetch}));
  EXPECT_EQ(policy_actions(Policy::Nth), (ActionSet{A::P2PFetch, A::VtsFetch, A::CdnFetch, A::OriginFetch}));
  EXPECT_EQ(policy_actions(Policy::Ect), (ActionSet{A::P2PFetch, A::VtsFetch, A::VtsTranscode,
                                                     A::CdnFetchVtsTranscode, A::CdnFetch, A::OriginFetch}));
  for (Policy p : kAllPolicies) EXPECT_EQ(parse_policy(to_string(p)), p);
  EXPECT_THROW(parse_policy("BEST"), std::invalid_argument);
}

TEST(Candidates, EmptyCachesOnlyOrigin) {
  Fixture f;
  const auto c = feasible_candidates(Fixture::request({0, 1, 2}), f.reg, f.ctx);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].action, Action::OriginFetch);
}

TEST(Candidates, MostStablePeerWins) {
  Fixture f;
  f.add(30, NodeKind::Peer, 5e6, {{0, 1, 2}}).join_time_s = 50;
  f.add(31, NodeKind::Peer, 5e6, {{0, 1, 2}}).join_time_s = 10;
  const auto c = feasible_candidates(Fixture::request({0, 1, 2}), f.reg, f.ctx);
  EXPECT_EQ(find_action(c, Action::P2PFetch).source, 31u);
}

TEST(Candidates, SeederIsNotServedByLeecher) {
  Fixture f;
  f.add(30, NodeKind::Peer, 5e6, {{0, 1, 2}}).role = PeerRole::Leecher;
  const auto c = feasible_candidates(Fixture::request({0, 1, 2}, PeerRole::Seeder), f.reg, f.ctx);
  EXPECT_FALSE(has_action(c, Action::P2PFetch));
  const auto c2 = feasible_candidates(Fixture::request({0, 1, 2}, PeerRole::Leecher), f.reg, f.ctx);
  EXPECT_TRUE(has_action(c2, Action::P2PFetch));
}

TEST(Candidates, TranscodeSourceIsLowestHigherRung) {
  Fixture f;
  f.reg.find_mutable(5)->cached = {{0, 1, 3}, {0, 1, 4}};
  const auto c = feasible_candidates(Fixture::request({0, 1, 1}), f.reg, f.ctx);
  EXPECT_EQ(find_action(c, Action::VtsTranscode).transcode_source_rung, 3);
  for (const auto& d : c) EXPECT_EQ(d.transcode_source_rung.has_value(), is_transcode(d.action));
}

TEST(Candidates, PeerTranscodeAdmission) {
  Fixture f;
  auto& p = f.add(30, NodeKind::Peer, 5e6, {{0, 1, 2}});
  p.battery_pct = 15;
  EXPECT_FALSE(has_action(feasible_candidates(Fixture::request({0, 1, 1}), f.reg, f.ctx), Action::P2PTranscode));
  f.reg.find_mutable(30)->battery_pct = 50;
  f.reg.find_mutable(30)->transcode_battery_spent_pct = 2.0;
  EXPECT_FALSE(has_action(feasible_candidates(Fixture::request({0, 1, 1}), f.reg, f.ctx), Action::P2PTranscode));
  f.reg.find_mutable(30)->transcode_battery_spent_pct = 1.0;
  EXPECT_TRUE(has_action(feasible_candidates(Fixture::request({0, 1, 1}), f.reg, f.ctx), Action::P2PTranscode));
  f.reg.find_mutable(30)->transcode_enabled = false;
  EXPECT_FALSE(has_action(feasible_candidates(Fixture::request({0, 1, 1}), f.reg, f.ctx), Action::P2PTranscode));
}

TEST(Candidates, CdnWithWidestShareChosen) {
  Fixture f;
  f.add(1, NodeKind::Cdn, 10e6, {{0, 1, 2}});
  f.add(2, NodeKind::Cdn, 30e6, {{0, 1, 2}});
  const auto c = feasible_candidates(Fixture::request({0, 1, 2}), f.reg, f.ctx);
  EXPECT_EQ(find_action(c, Action::CdnFetch).source, 2u);
}

TEST(Estimate, VtsFetchHandArithmetic) {
  Fixture f;
  f.reg.find_mutable(5)->cached = {{0, 1, 3}};
  const auto req = Fixture::request({0, 1, 3});
  const auto d = estimate_serving_time(find_action(feasible_candidates(req, f.reg, f.ctx), Action::VtsFetch), req,
                                       f.reg, f.ctx);
  EXPECT_NEAR(d.est_transmission_s, 621000 * 8 / 20e6, 1e-12);
  EXPECT_NEAR(d.est_transmission_s, 0.2484, 1e-9);
  EXPECT_EQ(d.est_computation_s, 0.0);
}

TEST(Estimate, EdgeTranscodeComputation) {
  Fixture f;
  f.reg.find_mutable(5)->cached = {{0, 1, 4}};
  const auto req = Fixture::request({0, 1, 3});
  const auto d = estimate_serving_time(find_action(feasible_candidates(req, f.reg, f.ctx), Action::VtsTranscode),
                                       req, f.reg, f.ctx);
  EXPECT_NEAR(d.est_computation_s, 0.2271, 1e-4);
  f.reg.find_mutable(5)->transcode_queue_length = 3;
  f.reg.find_mutable(5)->mean_transcode_job_s = 0.1;
  const auto queued = estimate_serving_time(d, req, f.reg, f.ctx);
  EXPECT_NEAR(queued.est_computation_s, 20.44 / 90 + 0.3, 1e-12);
}

TEST(Estimate, CdnBeatsOriginOnWiderLink) {
  Fixture f;
  f.add(1, NodeKind::Cdn, 100e6, {{0, 1, 2}});
  const auto req = Fixture::request({0, 1, 2});
  const auto c = feasible_candidates(req, f.reg, f.ctx);
  const auto six = estimate_serving_time(find_action(c, Action::CdnFetch), req, f.reg, f.ctx);
  const auto seven = estimate_serving_time(find_action(c, Action::OriginFetch), req, f.reg, f.ctx);
  EXPECT_LT(six.est_total_s(), seven.est_total_s());
  EXPECT_EQ(decide(req, f.reg, Policy::Noh, f.ctx).action, Action::CdnFetch);
}

TEST(Estimate, ZeroShareIsUnreachable) {
  Fixture f;
  f.add(1, NodeKind::Cdn, 0.0, {{0, 1, 2}});
  const auto req = Fixture::request({0, 1, 2});
  EXPECT_THROW(estimate_serving_time(find_action(feasible_candidates(req, f.reg, f.ctx), Action::CdnFetch), req,
                                     f.reg, f.ctx),
               UnreachableSource);
  EXPECT_EQ(decide(req, f.reg, Policy::Full, f.ctx).action, Action::OriginFetch);
}

TEST(Decide, NohWithEmptyCdnsUsesOrigin) {
  Fixture f;
  f.add(1, NodeKind::Cdn, 100e6);
  EXPECT_EQ(decide(Fixture::request({0, 1, 2}), f.reg, Policy::Noh, f.ctx).action, Action::OriginFetch);
}

TEST(Decide, FullTranscodesAtPeerWhereEctFetchesFromCdn) {
  Fixture f;
  f.reg.find_mutable(0)->available_bps = 0.5e6;
  f.add(1, NodeKind::Cdn, 1e6, {{0, 1, 1}});
  auto& peer = f.add(30, NodeKind::Peer, 5e6, {{0, 1, 2}});
  peer.device = DeviceClass::Pc;
  peer.battery_pct = 90;
  const auto req = Fixture::request({0, 1, 1});

  const auto full = decide(req, f.reg, Policy::Full, f.ctx);
  EXPECT_EQ(full.action, Action::P2PTranscode);
  EXPECT_EQ(full.transcode_source_rung, 2);
  EXPECT_NEAR(full.est_total_s(), 3.35 / 90 + 65500 * 8 / 5e6, 1e-12);
  EXPECT_EQ(decide(req, f.reg, Policy::Ect, f.ctx).action, Action::CdnFetch);

  oracle::OracleParams p;
  const auto o_full = oracle::brute_force(req.ref, req.requester, f.reg, policy_actions(Policy::Full), f.ladder,
                                          f.tables, p);
  const auto o_ect = oracle::brute_force(req.ref, req.requester, f.reg, policy_actions(Policy::Ect), f.ladder,
                                         f.tables, p);
  ASSERT_TRUE(o_full && o_ect);
  EXPECT_EQ(o_full->action, 2);
  EXPECT_EQ(o_ect->action, 6);
}

TEST(Decide, TiesGoToLowerAction) {
  Fixture f;
  f.reg.find_mutable(0)->available_bps = 100e6;
  f.add(1, NodeKind::Cdn, 100e6, {{0, 1, 2}});
  EXPECT_EQ(decide(Fixture::request({0, 1, 2}), f.reg, Policy::Full, f.ctx).action, Action::CdnFetch);
}

TEST(Decide, StrictPriorityTakesFirstReachable) {
  Fixture f;
  f.add(30, NodeKind::Peer, 0.1e6, {{0, 1, 2}});
  f.ctx.params.selection = SelectionRule::StrictPriority;
  EXPECT_EQ(decide(Fixture::request({0, 1, 2}), f.reg, Policy::Full, f.ctx).action, Action::P2PFetch);
  f.ctx.params.selection = SelectionRule::MinServingTime;
  EXPECT_EQ(decide(Fixture::request({0, 1, 2}), f.reg, Policy::Full, f.ctx).action, Action::OriginFetch);
}

TEST(Redecide, DepartedSourceNeverChosenAgain) {
  Fixture f;
  f.add(30, NodeKind::Peer, 20e6, {{0, 1, 2}}).join_time_s = 1;
  f.add(31, NodeKind::Peer, 20e6, {{0, 1, 2}}).join_time_s = 2;
  const auto req = Fixture::request({0, 1, 2});
  const auto first = decide(req, f.reg, Policy::Full, f.ctx);
  ASSERT_EQ(first.source, 30u);
  f.reg.remove(30);
  const auto again = decide(req, f.reg, Policy::Full, f.ctx);
  EXPECT_EQ(again.action, Action::P2PFetch);
  EXPECT_EQ(again.source, 31u);
  f.reg.remove(31);
  EXPECT_NE(decide(req, f.reg, Policy::Full, f.ctx).action, Action::P2PFetch);
}

TEST(Redecide, TerminatesWithinActionCount) {
  std::mt19937_64 rng(77);
  Ladder ladder = default_ladder();
  CostTables tables = CostTables::published();
  DecisionContext ctx{&ladder, 2.0, &tables, {}};
  int checked = 0;
  while (checked < 300) {
    auto s = oracle::random_state(rng);
    if (s.registry.find(0)->available_bps <= 0.0 || s.requester.available_bps <= 0.0) continue;
    ++checked;
    Request req{s.ref, s.requester};
    ActionSet excluded;
    Decision d = decide(req, s.registry, Policy::Full, ctx, excluded);
    int rounds = 0;
    while (d.action != Action::OriginFetch) {
      d = on_failure_redecide(req, s.registry, Policy::Full, ctx, excluded, d);
      ++rounds;
    }
    EXPECT_LE(rounds, kActionCount - 1);
  }
}

TEST(DecideProperty, MatchesBruteForceOracle) {
  std::mt19937_64 rng(123);
  Ladder ladder = default_ladder();
  CostTables tables = CostTables::published();
  DecisionContext ctx{&ladder, 2.0, &tables, {}};
  for (int i = 0; i < 500; ++i) {
    auto s = oracle::random_state(rng);
    Request req{s.ref, s.requester};
    for (Policy p : kAllPolicies) {
      const auto expect = oracle::brute_force(s.ref, s.requester, s.registry, policy_actions(p), ladder, tables, {});
      if (!expect) {
        EXPECT_THROW(decide(req, s.registry, p, ctx), std::logic_error);
        continue;
      }
      const auto got = decide(req, s.registry, p, ctx);
      ASSERT_EQ(action_number(got.action), expect->action) << "state " << i << " policy " << to_string(p);
      EXPECT_EQ(got.source, expect->source);
      EXPECT_EQ(got.transcode_source_rung.value_or(-1), expect->source_rung);
      EXPECT_NEAR(got.est_total_s(), expect->total(), 1e-9 * std::max(1.0, expect->total()));
    }
  }
}

TEST(DecideProperty, FullIsNeverWorseAndRespectsPolicyAndRoles) {
  std::mt19937_64 rng(321);
  Ladder ladder = default_ladder();
  CostTables tables = CostTables::published();
  DecisionContext ctx{&ladder, 2.0, &tables, {}};
  for (int i = 0; i < 500; ++i) {
    auto s = oracle::random_state(rng);
    if (s.registry.find(0)->available_bps <= 0.0 || s.requester.available_bps <= 0.0) continue;
    Request req{s.ref, s.requester};
    const auto full = decide(req, s.registry, Policy::Full, ctx);
    for (Policy p : kAllPolicies) {
      const auto d = decide(req, s.registry, p, ctx);
      EXPECT_TRUE(policy_actions(p).contains(d.action));
      EXPECT_LE(full.est_total_s(), d.est_total_s());
      if (d.action == Action::P2PFetch || d.action == Action::P2PTranscode) {
        const NodeView* src = s.registry.find(d.source);
        ASSERT_NE(src, nullptr);
        EXPECT_FALSE(s.requester.role == PeerRole::Seeder && src->role == PeerRole::Leecher);
      }
    }
  }
}

TEST(DecideProperty, PureFetchChoiceInvariantUnderBandwidthScaling) {
  std::mt19937_64 rng(555);
  Ladder ladder = default_ladder();
  CostTables tables = CostTables::published();
  DecisionContext ctx{&ladder, 2.0, &tables, {}};
  for (int i = 0; i < 300; ++i) {
    auto s = oracle::random_state(rng);
    if (s.registry.find(0)->available_bps <= 0.0 || s.requester.available_bps <= 0.0) continue;
    for (Policy p : {Policy::Noh, Policy::Seh, Policy::Nth}) {
      const auto base = decide({s.ref, s.requester}, s.registry, p, ctx);
      for (double c : {0.25, 0.5, 2.0, 8.0}) {
        Registry scaled = s.registry;
        for (auto& [id, n] : scaled.nodes_mutable()) n.available_bps *= c;
        NodeView requester = s.requester;
        requester.available_bps *= c;
        const auto d = decide({s.ref, requester}, scaled, p, ctx);
        EXPECT_EQ(d.action, base.action);
        EXPECT_EQ(d.source, base.source);
      }
    }
  }
}
