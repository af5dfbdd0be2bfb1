#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace hybridcdn {

using LinkId = std::uint32_t;
using FlowId = std::uint64_t;

/// Equal-share fluid allocation: each link's capacity is split evenly among
/// the flows crossing it and a flow runs at the minimum share along its path.
/// flow_links[i] lists the links of flow i.
std::vector<double> bandwidth_reallocate(std::span<const double> link_capacity_bps,
                                         const std::vector<std::vector<LinkId>>& flow_links);

/// Links and in-flight transfers. Remaining bits advance piecewise-linearly
/// between calls; rates are recomputed whenever a flow starts or ends.
class FlowNetwork {
 public:
  LinkId add_link(double capacity_bps);

  FlowId start(std::vector<LinkId> links, double bits, double now_s);
  // Removes the flow; returns false when it was not active.
  bool cancel(FlowId id, double now_s);

  struct Completion {
    double time_s;
    FlowId flow;
  };
  /// Earliest finishing flow under current rates; ties go to the lower id.
  std::optional<Completion> next_completion() const;
  /// Removes a flow that has reached its completion time.
  void complete(FlowId id, double now_s);

  /// Share a new flow would receive on this link right now.
  double prospective_share(LinkId link) const;
  int flow_count(LinkId link) const { return link_flows_.at(link); }
  double capacity(LinkId link) const { return capacity_.at(link); }
  double rate(FlowId id) const;
  std::size_t active_flows() const noexcept { return flows_.size(); }

  /// Worst observed (sum of rates / capacity) over all links and all
  /// reallocations so far.
  double max_utilization() const noexcept { return max_utilization_; }

 private:
  struct Flow {
    std::vector<LinkId> links;
    double remaining_bits = 0.0;
    double rate_bps = 0.0;
  };

  void advance(double now_s);
  void reallocate();

  std::vector<double> capacity_;
  std::vector<int> link_flows_;
  std::map<FlowId, Flow> flows_;
  FlowId next_id_ = 1;
  double last_update_s_ = 0.0;
  double max_utilization_ = 0.0;
};

}  // namespace hybridcdn
