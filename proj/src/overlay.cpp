#include "hybridcdn/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hybridcdn {

bool Overlay::can_serve(NodeId source, NodeId requester) const {
  if (source == requester) return false;
  auto s = members.find(source);
  auto r = members.find(requester);
  if (s == members.end() || r == members.end()) return false;
  if (s->second.group_id != r->second.group_id) return false;
  return !(r->second.role == PeerRole::Seeder && s->second.role == PeerRole::Leecher);
}

std::vector<NodeId> Overlay::mesh_neighbours(NodeId seeder) const {
  std::vector<NodeId> out;
  const auto& m = members.at(seeder);
  if (m.role != PeerRole::Seeder) return out;
  for (NodeId id : groups.at(static_cast<std::size_t>(m.group_id)))
    if (id != seeder && members.at(id).role == PeerRole::Seeder) out.push_back(id);
  return out;
}

void build_group_tree(Overlay& overlay, int group_id, double seeder_fraction,
                      const std::map<NodeId, double>& join_times) {
  auto& ids = overlay.groups.at(static_cast<std::size_t>(group_id));
  std::vector<NodeId> by_join(ids.begin(), ids.end());
  std::stable_sort(by_join.begin(), by_join.end(), [&](NodeId a, NodeId b) {
    const double ja = join_times.at(a), jb = join_times.at(b);
    return ja != jb ? ja < jb : a < b;
  });
  const auto seeders = static_cast<std::size_t>(std::ceil(seeder_fraction * static_cast<double>(by_join.size())));
  for (std::size_t i = 0; i < by_join.size(); ++i) {
    auto& m = overlay.members[by_join[i]];
    m.group_id = group_id;
    m.role = i < seeders ? PeerRole::Seeder : PeerRole::Leecher;
    m.parent.reset();
    m.children.clear();
  }
  for (std::size_t i = seeders; i < by_join.size(); ++i) {
    NodeId best = by_join[0];
    for (std::size_t s = 1; s < seeders; ++s) {
      const NodeId cand = by_join[s];
      const auto nc = overlay.members[cand].children.size();
      const auto nb = overlay.members[best].children.size();
      if (nc < nb || (nc == nb && cand < best)) best = cand;
    }
    overlay.members[by_join[i]].parent = best;
    overlay.members[best].children.push_back(by_join[i]);
  }
}

void build_group_tree(Overlay& overlay, int group_id, double seeder_fraction) {
  // Without explicit join times the group's listed order is the join order.
  std::map<NodeId, double> order;
  const auto& ids = overlay.groups.at(static_cast<std::size_t>(group_id));
  for (std::size_t i = 0; i < ids.size(); ++i) order[ids[i]] = static_cast<double>(i);
  build_group_tree(overlay, group_id, seeder_fraction, order);
}

Overlay overlay_build(const std::vector<PeerJoin>& peers, int group_count, double seeder_fraction) {
  if (group_count < 1) throw std::invalid_argument("group_count must be >= 1");
  if (peers.size() < static_cast<std::size_t>(group_count))
    throw std::invalid_argument("need at least one peer per group");
  if (!(seeder_fraction > 0.0 && seeder_fraction <= 1.0))
    throw std::invalid_argument("seeder_fraction must be in (0, 1]");
  Overlay overlay;
  overlay.groups.resize(static_cast<std::size_t>(group_count));
  std::map<NodeId, double> join_times;
  for (std::size_t i = 0; i < peers.size(); ++i) {
    overlay.groups[i % static_cast<std::size_t>(group_count)].push_back(peers[i].id);
    join_times[peers[i].id] = peers[i].join_time_s;
  }
  for (int g = 0; g < group_count; ++g) build_group_tree(overlay, g, seeder_fraction, join_times);
  return overlay;
}

}  // namespace hybridcdn
