#pragma once

#include <map>
#include <optional>
#include <vector>

#include "hybridcdn/registry.hpp"

namespace hybridcdn {

struct PeerJoin {
  NodeId id = 0;
  double join_time_s = 0.0;
};

struct Membership {
  int group_id = 0;
  PeerRole role = PeerRole::Leecher;
  std::optional<NodeId> parent;  // tree parent for leechers
  std::vector<NodeId> children;  // leechers attached to a seeder
};

/// Tree-mesh overlay. Within each group the seeders form a full mesh and each
/// leecher hangs off one seeder.
struct Overlay {
  std::map<NodeId, Membership> members;
  std::vector<std::vector<NodeId>> groups;  // member ids per group, input order

  const Membership& at(NodeId id) const { return members.at(id); }
  /// Same group, excluding leechers as sources for a seeder.
  bool can_serve(NodeId source, NodeId requester) const;
  std::vector<NodeId> mesh_neighbours(NodeId seeder) const;
};

/// Assigns roles within one group: the earliest-joining ceil(fraction x size)
/// peers (ties by id) become seeders; each leecher, in join order, attaches
/// to the seeder with the fewest children (ties by id).
void build_group_tree(Overlay& overlay, int group_id, double seeder_fraction,
                      const std::map<NodeId, double>& join_times);
// Same, treating the group's listed order as join order.
void build_group_tree(Overlay& overlay, int group_id, double seeder_fraction);

/// Partitions peers round-robin (in the given order) into group_count groups
/// and builds each group's tree. Throws std::invalid_argument when
/// peers < group_count or the fraction is outside (0, 1].
Overlay overlay_build(const std::vector<PeerJoin>& peers, int group_count, double seeder_fraction);

}  // namespace hybridcdn
