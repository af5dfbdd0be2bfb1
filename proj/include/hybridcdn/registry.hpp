#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "hybridcdn/cost_models.hpp"
#include "hybridcdn/media.hpp"

namespace hybridcdn {

using NodeId = std::uint32_t;

enum class NodeKind { Peer, Vts, Cdn, Origin };
enum class PeerRole { Seeder, Leecher };

std::string_view to_string(NodeKind kind);
std::string_view to_string(PeerRole role);

/// The tracker's view of one node. Report-derived fields may be up to one
/// monitoring interval old; available_bps and the transcode queue fields are
/// refreshed from live monitoring right before a decision.
struct NodeView {
  NodeId node_id = 0;
  NodeKind kind = NodeKind::Peer;
  PeerRole role = PeerRole::Leecher;
  int group_id = 0;
  std::vector<SegmentRef> cached;  // sorted ascending
  double join_time_s = 0.0;
  double battery_pct = 100.0;
  DeviceClass device = DeviceClass::Pc;
  bool playing = false;
  double available_bps = 0.0;
  int transcode_slots_free = 0;
  int transcode_queue_length = 0;
  double mean_transcode_job_s = 0.0;
  bool transcode_enabled = true;
  double transcode_battery_spent_pct = 0.0;  // tracker-side session total
  double report_time_s = 0.0;

  bool holds(const SegmentRef& ref) const;
  // Lowest cached rung above ref.rung_index for the same channel/segment.
  std::optional<int> lowest_rung_above(const SegmentRef& ref) const;
  double report_age_s(double now_s) const { return now_s - report_time_s; }
};

/// Sorts and de-duplicates a cached list in place.
void normalize_cached(std::vector<SegmentRef>& cached);

/// Latest known state of every node, keyed by id (ordered, so iteration is
/// deterministic).
class Registry {
 public:
  /// Replaces the node's view. Returns false (and leaves the registry
  /// unchanged) when the stored view has a newer report time.
  bool upsert(NodeView view);
  bool remove(NodeId id);

  const NodeView* find(NodeId id) const;
  NodeView* find_mutable(NodeId id);

  const std::map<NodeId, NodeView>& nodes() const noexcept { return nodes_; }
  std::map<NodeId, NodeView>& nodes_mutable() noexcept { return nodes_; }

  const NodeView* first_of_kind(NodeKind kind) const;
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  std::map<NodeId, NodeView> nodes_;
};

}  // namespace hybridcdn
