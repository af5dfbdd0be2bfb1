#include "hybridcdn/registry.hpp"

#include <algorithm>

namespace hybridcdn {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Peer: return "peer";
    case NodeKind::Vts: return "vts";
    case NodeKind::Cdn: return "cdn";
    case NodeKind::Origin: return "origin";
  }
  return "?";
}

std::string_view to_string(PeerRole role) { return role == PeerRole::Seeder ? "seeder" : "leecher"; }

bool NodeView::holds(const SegmentRef& ref) const {
  return std::binary_search(cached.begin(), cached.end(), ref);
}

std::optional<int> NodeView::lowest_rung_above(const SegmentRef& ref) const {
  SegmentRef probe = ref;
  probe.rung_index = ref.rung_index + 1;
  auto it = std::lower_bound(cached.begin(), cached.end(), probe);
  if (it != cached.end() && it->channel_id == ref.channel_id && it->segment_index == ref.segment_index)
    return it->rung_index;
  return std::nullopt;
}

void normalize_cached(std::vector<SegmentRef>& cached) {
  std::sort(cached.begin(), cached.end());
  cached.erase(std::unique(cached.begin(), cached.end()), cached.end());
}

bool Registry::upsert(NodeView view) {
  auto it = nodes_.find(view.node_id);
  if (it != nodes_.end()) {
    if (it->second.report_time_s > view.report_time_s) return false;
    it->second = std::move(view);
    return true;
  }
  const NodeId id = view.node_id;
  nodes_.emplace(id, std::move(view));
  return true;
}

bool Registry::remove(NodeId id) { return nodes_.erase(id) != 0; }

const NodeView* Registry::find(NodeId id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

NodeView* Registry::find_mutable(NodeId id) {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const NodeView* Registry::first_of_kind(NodeKind kind) const {
  for (const auto& [id, v] : nodes_)
    if (v.kind == kind) return &v;
  return nullptr;
}

}  // namespace hybridcdn
