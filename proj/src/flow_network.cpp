#include "hybridcdn/flow_network.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace hybridcdn {

std::vector<double> bandwidth_reallocate(std::span<const double> link_capacity_bps,
                                         const std::vector<std::vector<LinkId>>& flow_links) {
  std::vector<int> count(link_capacity_bps.size(), 0);
  for (const auto& links : flow_links)
    for (LinkId l : links) ++count.at(l);
  std::vector<double> rates;
  rates.reserve(flow_links.size());
  for (const auto& links : flow_links) {
    double r = std::numeric_limits<double>::infinity();
    for (LinkId l : links) r = std::min(r, link_capacity_bps[l] / count[l]);
    rates.push_back(links.empty() ? 0.0 : r);
  }
  return rates;
}

LinkId FlowNetwork::add_link(double capacity_bps) {
  if (!(capacity_bps > 0.0)) throw std::invalid_argument("link capacity must be positive");
  capacity_.push_back(capacity_bps);
  link_flows_.push_back(0);
  return static_cast<LinkId>(capacity_.size() - 1);
}

FlowId FlowNetwork::start(std::vector<LinkId> links, double bits, double now_s) {
  if (links.empty()) throw std::invalid_argument("flow needs at least one link");
  for (LinkId l : links)
    if (l >= capacity_.size()) throw std::out_of_range("unknown link");
  advance(now_s);
  const FlowId id = next_id_++;
  for (LinkId l : links) ++link_flows_[l];
  flows_.emplace(id, Flow{std::move(links), std::max(bits, 0.0), 0.0});
  reallocate();
  return id;
}

bool FlowNetwork::cancel(FlowId id, double now_s) {
  auto it = flows_.find(id);
  if (it == flows_.end()) return false;
  advance(now_s);
  for (LinkId l : it->second.links) --link_flows_[l];
  flows_.erase(it);
  reallocate();
  return true;
}

void FlowNetwork::complete(FlowId id, double now_s) {
  auto it = flows_.find(id);
  if (it == flows_.end()) throw std::logic_error("completing an inactive flow");
  advance(now_s);
  for (LinkId l : it->second.links) --link_flows_[l];
  flows_.erase(it);
  reallocate();
}

std::optional<FlowNetwork::Completion> FlowNetwork::next_completion() const {
  std::optional<Completion> best;
  for (const auto& [id, f] : flows_) {
    const double t = f.remaining_bits <= 0.0 ? last_update_s_ : last_update_s_ + f.remaining_bits / f.rate_bps;
    if (!best || t < best->time_s) best = Completion{t, id};
  }
  return best;
}

double FlowNetwork::prospective_share(LinkId link) const {
  return capacity_.at(link) / static_cast<double>(link_flows_.at(link) + 1);
}

double FlowNetwork::rate(FlowId id) const {
  auto it = flows_.find(id);
  return it == flows_.end() ? 0.0 : it->second.rate_bps;
}

void FlowNetwork::advance(double now_s) {
  const double dt = now_s - last_update_s_;
  if (dt > 0.0)
    for (auto& [id, f] : flows_) f.remaining_bits -= f.rate_bps * dt;
  last_update_s_ = std::max(last_update_s_, now_s);
}

void FlowNetwork::reallocate() {
  std::vector<double> load(capacity_.size(), 0.0);
  for (auto& [id, f] : flows_) {
    double r = std::numeric_limits<double>::infinity();
    for (LinkId l : f.links) r = std::min(r, capacity_[l] / link_flows_[l]);
    f.rate_bps = r;
    for (LinkId l : f.links) load[l] += r;
  }
  for (std::size_t l = 0; l < capacity_.size(); ++l)
    max_utilization_ = std::max(max_utilization_, load[l] / capacity_[l]);
}

}  // namespace hybridcdn
