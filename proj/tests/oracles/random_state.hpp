#pragma once

#include <random>

#include "hybridcdn/decision.hpp"
#include "hybridcdn/registry.hpp"

namespace oracle {

using namespace hybridcdn;

struct RandomState {
  Registry registry;
  SegmentRef ref;
  NodeView requester;
};

// Small registry over a handful of segments so that cache hits are common.
// Bandwidth shares are drawn from a coarse grid (including zero) so that
// exact ties between candidates occur.
inline RandomState random_state(std::mt19937_64& rng, int rungs = 5) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  const double shares[] = {0.0, 1e6, 2.5e6, 5e6, 10e6, 20e6, 50e6, 100e6};
  auto share = [&] { return shares[pick(0, 7)]; };

  RandomState s;
  s.ref = {pick(0, 1), pick(0, 2), pick(0, rungs - 1)};
  auto random_cache = [&](int max_items) {
    std::vector<SegmentRef> c;
    const int n = pick(0, max_items);
    for (int i = 0; i < n; ++i) c.push_back({pick(0, 1), pick(0, 2), pick(0, rungs - 1)});
    normalize_cached(c);
    return c;
  };

  NodeView origin;
  origin.node_id = 0;
  origin.kind = NodeKind::Origin;
  origin.available_bps = coin(0.1) ? 0.0 : std::max(1e6, share());
  s.registry.upsert(origin);
  const int cdns = pick(0, 4);
  for (int c = 0; c < cdns; ++c) {
    NodeView v;
    v.node_id = static_cast<NodeId>(1 + c);
    v.kind = NodeKind::Cdn;
    v.cached = random_cache(25);
    v.available_bps = share();
    s.registry.upsert(v);
  }
  if (coin(0.9)) {
    NodeView v;
    v.node_id = 10;
    v.kind = NodeKind::Vts;
    v.cached = random_cache(15);
    v.transcode_queue_length = pick(0, 6);
    v.mean_transcode_job_s = 0.05 * pick(0, 6);
    s.registry.upsert(v);
  }
  const int peers = pick(0, 10);
  for (int i = 0; i < peers; ++i) {
    NodeView v;
    v.node_id = static_cast<NodeId>(20 + i);
    v.kind = NodeKind::Peer;
    v.role = coin(0.3) ? PeerRole::Seeder : PeerRole::Leecher;
    v.group_id = pick(0, 1);
    v.cached = random_cache(6);
    v.join_time_s = pick(0, 5) * 10.0;
    v.device = coin(0.5) ? DeviceClass::Pc : DeviceClass::Mobile;
    v.battery_pct = pick(0, 10) * 10.0;
    v.transcode_enabled = coin(0.8);
    v.transcode_slots_free = pick(0, 1);
    v.transcode_battery_spent_pct = pick(0, 3) * 1.0;
    v.available_bps = share();
    s.registry.upsert(v);
  }
  s.requester.node_id = 99;
  s.requester.kind = NodeKind::Peer;
  s.requester.role = coin(0.3) ? PeerRole::Seeder : PeerRole::Leecher;
  s.requester.group_id = pick(0, 1);
  s.requester.available_bps = std::max(1e6, share());
  return s;
}

}  // namespace oracle
