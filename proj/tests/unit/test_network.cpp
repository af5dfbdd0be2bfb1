#include <gtest/gtest.h>

#include <random>

#include "hybridcdn/flow_network.hpp"
#include "hybridcdn/overlay.hpp"

using namespace hybridcdn;

TEST(Reallocate, Examples) {
  const std::vector<double> caps = {100e6, 50e6};
  EXPECT_EQ(bandwidth_reallocate(caps, {{0}}), std::vector<double>{100e6});
  EXPECT_EQ(bandwidth_reallocate(caps, {{0}, {0}}), (std::vector<double>{50e6, 50e6}));
  const auto r = bandwidth_reallocate(std::vector<double>{100e6, 50e6}, {{0, 1}, {0}});
  EXPECT_EQ(r[0], 50e6);
  EXPECT_EQ(r[1], 50e6);
  const auto r2 = bandwidth_reallocate(std::vector<double>{100e6, 50e6, 100e6}, {{0, 1}, {0}, {0}, {2}});
  EXPECT_DOUBLE_EQ(r2[0], 100e6 / 3);
  EXPECT_EQ(r2[3], 100e6);
}

TEST(FlowNetwork, SingleFlowCompletesOnTime) {
  FlowNetwork net;
  const auto l = net.add_link(100e6);
  const auto f = net.start({l}, 100e6, 0.0);
  const auto c = net.next_completion();
  ASSERT_TRUE(c);
  EXPECT_EQ(c->flow, f);
  EXPECT_DOUBLE_EQ(c->time_s, 1.0);
}

TEST(FlowNetwork, SharesAndSpeedsUpAfterCompletion) {
  FlowNetwork net;
  const auto l = net.add_link(100e6);
  const auto a = net.start({l}, 50e6, 0.0);
  const auto b = net.start({l}, 100e6, 0.0);
  EXPECT_DOUBLE_EQ(net.rate(a), 50e6);
  EXPECT_DOUBLE_EQ(net.prospective_share(l), 100e6 / 3);
  auto c = net.next_completion();
  ASSERT_TRUE(c);
  EXPECT_EQ(c->flow, a);
  EXPECT_DOUBLE_EQ(c->time_s, 1.0);
  net.complete(a, 1.0);
  EXPECT_DOUBLE_EQ(net.rate(b), 100e6);
  c = net.next_completion();
  EXPECT_DOUBLE_EQ(c->time_s, 1.5);
}

TEST(FlowNetwork, CancelFreesCapacity) {
  FlowNetwork net;
  const auto l = net.add_link(10e6);
  const auto a = net.start({l}, 10e6, 0.0);
  const auto b = net.start({l}, 10e6, 0.0);
  EXPECT_TRUE(net.cancel(a, 0.5));
  EXPECT_FALSE(net.cancel(a, 0.5));
  EXPECT_EQ(net.flow_count(l), 1);
  EXPECT_DOUBLE_EQ(net.next_completion()->time_s, 1.25);
  (void)b;
}

TEST(FlowNetwork, UtilizationNeverExceedsCapacity) {
  std::mt19937_64 rng(4);
  FlowNetwork net;
  for (int i = 0; i < 6; ++i) net.add_link(1e6 * (1 + i));
  double now = 0.0;
  for (int step = 0; step < 2000; ++step) {
    if (rng() % 3 || net.active_flows() == 0) {
      std::vector<LinkId> links = {static_cast<LinkId>(rng() % 6)};
      if (rng() % 2) links.push_back(static_cast<LinkId>(rng() % 6));
      if (links.size() == 2 && links[0] == links[1]) links.pop_back();
      net.start(links, 1e5 + static_cast<double>(rng() % 1000000), now);
    } else {
      const auto c = net.next_completion();
      ASSERT_GE(c->time_s, now);
      now = c->time_s;
      net.complete(c->flow, now);
    }
  }
  EXPECT_LE(net.max_utilization(), 1.0 + 1e-6);
  EXPECT_GT(net.max_utilization(), 0.5);
}

TEST(Overlay, TenPeersTwoSeeders) {
  std::vector<PeerJoin> peers;
  for (NodeId i = 0; i < 10; ++i) peers.push_back({100 + i, static_cast<double>(i)});
  const Overlay o = overlay_build(peers, 1, 0.2);
  int seeders = 0;
  for (const auto& [id, m] : o.members) {
    if (m.role == PeerRole::Seeder) {
      ++seeders;
      EXPECT_FALSE(m.parent);
    } else {
      ASSERT_TRUE(m.parent);
      EXPECT_EQ(o.at(*m.parent).role, PeerRole::Seeder);
    }
  }
  EXPECT_EQ(seeders, 2);
  EXPECT_EQ(o.at(100).role, PeerRole::Seeder);
  EXPECT_EQ(o.at(101).role, PeerRole::Seeder);
  EXPECT_EQ(o.at(100).children.size(), 4u);
  EXPECT_EQ(o.at(101).children.size(), 4u);
  EXPECT_EQ(o.mesh_neighbours(100), std::vector<NodeId>{101});
}

TEST(Overlay, SeederNotServedByLeecher) {
  std::vector<PeerJoin> peers;
  for (NodeId i = 0; i < 10; ++i) peers.push_back({i, static_cast<double>(i)});
  const Overlay o = overlay_build(peers, 1, 0.2);
  EXPECT_FALSE(o.can_serve(5, 0));
  EXPECT_TRUE(o.can_serve(0, 5));
  EXPECT_TRUE(o.can_serve(1, 0));
  EXPECT_TRUE(o.can_serve(6, 5));
}

TEST(Overlay, SevenGroupsOfFifty) {
  std::vector<PeerJoin> peers;
  for (NodeId i = 0; i < 350; ++i) peers.push_back({i, 0.0});
  const Overlay o = overlay_build(peers, 7, 0.2);
  ASSERT_EQ(o.groups.size(), 7u);
  for (const auto& g : o.groups) EXPECT_EQ(g.size(), 50u);
  EXPECT_FALSE(o.can_serve(0, 1));
  EXPECT_TRUE(o.can_serve(0, 7));
}

TEST(Overlay, Errors) {
  EXPECT_THROW(overlay_build({{1, 0.0}}, 2, 0.2), std::invalid_argument);
  EXPECT_THROW(overlay_build({{1, 0.0}}, 1, 0.0), std::invalid_argument);
}

TEST(Overlay, JoinTimesDecideSeeders) {
  Overlay o;
  o.groups = {{5, 6, 7, 8}};
  for (NodeId id : o.groups[0]) o.members[id].group_id = 0;
  build_group_tree(o, 0, 0.5, {{5, 40.0}, {6, 10.0}, {7, 30.0}, {8, 10.0}});
  EXPECT_EQ(o.at(6).role, PeerRole::Seeder);
  EXPECT_EQ(o.at(8).role, PeerRole::Seeder);
  EXPECT_EQ(o.at(5).role, PeerRole::Leecher);
}
