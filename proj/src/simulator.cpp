#include "hybridcdn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <queue>
#include <set>

#include "hybridcdn/abr.hpp"
#include "hybridcdn/cache.hpp"
#include "hybridcdn/decision.hpp"
#include "hybridcdn/errors.hpp"
#include "hybridcdn/flow_network.hpp"
#include "hybridcdn/messaging.hpp"
#include "hybridcdn/overlay.hpp"
#include "hybridcdn/registry.hpp"

namespace hybridcdn {

CostTables scenario_tables(const ScenarioConfig& config) {
  if (config.cost_tables_path.empty())
    return CostTables::published().with_edge(config.edge_power_watts, config.edge_speed_factor);
  std::ifstream in(config.cost_tables_path);
  if (!in) throw ConfigError("cannot open cost tables '" + config.cost_tables_path + "'");
  try {
    return CostTables::from_csv(in, config.edge_power_watts, config.edge_speed_factor);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("cost tables: ") + e.what());
  }
}

ChurnArrival churn_step(Rng& rng, const ChurnParams& params, double now_s) {
  ChurnArrival a;
  a.time_s = now_s + exponential(rng, 1.0 / params.arrival_rate_per_s);
  a.session_s = exponential(rng, params.mean_session_s);
  return a;
}

std::vector<PeerSession> churn_schedule(Rng& rng, const ChurnParams& params, int peer_count, double duration_s) {
  std::vector<PeerSession> out;
  if (!params.enabled) {
    for (int i = 0; i < peer_count; ++i) out.push_back({uniform01(rng) * params.join_spread_s});
    std::stable_sort(out.begin(), out.end(), [](const PeerSession& a, const PeerSession& b) { return a.join_s < b.join_s; });
    return out;
  }
  std::multiset<double> active_leaves;
  double now = 0.0;
  while (true) {
    const ChurnArrival a = churn_step(rng, params, now);
    now = a.time_s;
    if (now >= duration_s) break;
    while (!active_leaves.empty() && *active_leaves.begin() <= now) active_leaves.erase(active_leaves.begin());
    if (static_cast<int>(active_leaves.size()) >= peer_count) continue;
    out.push_back({now, now + a.session_s});
    active_leaves.insert(now + a.session_s);
  }
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class EventKind { SegmentAvailable, ReportTick, PeerJoin, PeerLeave, RequestIssued, TranscodeCompleted };

struct Event {
  double time;
  std::uint64_t seq;
  EventKind kind;
  std::uint64_t a;
  std::uint64_t b;
};

struct EventLater {
  bool operator()(const Event& x, const Event& y) const {
    return x.time != y.time ? x.time > y.time : x.seq > y.seq;
  }
};

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

struct Peer {
  NodeId id = 0;
  int group = 0;
  DeviceClass device = DeviceClass::Pc;
  PeerSession session;
  bool alive = false;
  LruCache cache{1};
  double battery_pct = 100.0;
  double spent_pct = 0.0;
  LinkId up = 0, down = 0;
  int uploads = 0;
  bool transcoding = false;

  int channel = 0;
  double phase_s = 0.0;
  double startup_buffer_s = 0.0;

  std::int64_t next_segment = -1;
  double buffer_s = 0.0;
  double buffer_updated_s = 0.0;
  bool started = false;
  bool stalled = false;
  double stall_started_s = 0.0;
  double pending_stall_s = 0.0;
  ThroughputEstimator throughput{5};
  std::optional<int> last_rung;

  bool playing() const { return started && !stalled; }
};

enum class Stage { PeerTranscode, P2PFlow, Ingress, VtsQueued, VtsTranscode, Egress };

struct Active {
  RequestRecord rec;
  std::size_t client = 0;
  ActionSet excluded;
  Decision decision;
  std::uint64_t attempt = 0;
  double attempt_start = 0.0;
  double stage_start = 0.0;
  Stage stage = Stage::Egress;
  std::optional<FlowId> flow;
  std::size_t src_peer = kNone;
  bool holds_upload = false;
  bool holds_peer_transcoder = false;
  bool holds_vts_slot = false;
  double transmission = 0.0;
  double computation = 0.0;
  int redecisions = 0;
};

class Engine {
 public:
  explicit Engine(const ScenarioConfig& cfg)
      : cfg_(cfg),
        tables_(scenario_tables(cfg)),
        catalog_(ChannelCatalog::make(cfg.channel_count, cfg.segment_duration_s, cfg.zipf_alpha)),
        rng_peers_(splitmix64(cfg.seed ^ 0x1111)),
        rng_cdn_(splitmix64(cfg.seed ^ 0x2222)),
        rng_churn_(splitmix64(cfg.seed ^ 0x3333)) {
    tables_.validate_coverage(cfg.ladder);
    ctx_.ladder = &cfg_.ladder;
    ctx_.segment_duration_s = cfg.segment_duration_s;
    ctx_.tables = &tables_;
    ctx_.params.battery_threshold_pct = cfg.battery_threshold_pct;
    ctx_.params.battery_budget_pct = cfg.battery_budget_pct;
    ctx_.params.selection = cfg.selection;
    vts_caches_ = policy_actions(cfg.policy).contains(Action::VtsFetch);

    const std::size_t dataset =
        live_dataset_segments(cfg.live_window_segments, cfg.channel_count, static_cast<int>(cfg.ladder.size()));
    const std::size_t cdn_cap =
        resolve_capacity({CapacityMode::DatasetFraction, cfg.cdn_cache_fraction, CacheRole::Cdn}, dataset);
    const std::size_t vts_cap =
        resolve_capacity({CapacityMode::DatasetFraction, cfg.vts_cache_fraction, CacheRole::Vts}, dataset);
    peer_cap_ = resolve_capacity(
        {CapacityMode::SegmentCount, static_cast<double>(cfg.peer_cache_segments), CacheRole::Peer}, std::nullopt);

    // Node ids: origin 0, CDNs 1..C, VTS C+1, peers after.
    origin_id_ = 0;
    origin_link_ = net_.add_link(cfg.origin_link_bps);
    for (int c = 0; c < cfg.cdn_count; ++c) {
      cdn_caches_.emplace_back(cdn_cap);
      cdn_links_.push_back(net_.add_link(cfg.cdn_link_bps));
    }
    vts_id_ = static_cast<NodeId>(cfg.cdn_count + 1);
    peer_base_ = vts_id_ + 1;
    vts_cache_.emplace(vts_cap);

    NodeView origin;
    origin.node_id = origin_id_;
    origin.kind = NodeKind::Origin;
    registry_.upsert(origin);
    for (int c = 0; c < cfg.cdn_count; ++c) {
      NodeView v;
      v.node_id = static_cast<NodeId>(c + 1);
      v.kind = NodeKind::Cdn;
      registry_.upsert(v);
    }
    NodeView vts;
    vts.node_id = vts_id_;
    vts.kind = NodeKind::Vts;
    registry_.upsert(vts);

    double mean = 0.0;
    int pairs = 0;
    for (std::size_t s = 0; s < cfg.ladder.size(); ++s)
      for (std::size_t t = 0; t < s; ++t) {
        mean += tables_.transcode_time_per_segment(cfg.ladder[s], cfg.ladder[t], DeviceClass::Edge);
        ++pairs;
      }
    vts_mean_job_s_ = pairs > 0 ? mean / pairs : 0.0;

    const auto sessions = churn_schedule(rng_churn_, cfg.churn, cfg.peer_count, cfg.duration_s);
    overlay_.groups.resize(static_cast<std::size_t>(cfg.group_count));
    for (std::size_t i = 0; i < sessions.size(); ++i) {
      Peer p;
      p.id = peer_base_ + static_cast<NodeId>(i);
      p.group = static_cast<int>(i % static_cast<std::size_t>(cfg.group_count));
      p.session = sessions[i];
      p.cache = LruCache(peer_cap_);
      p.throughput = ThroughputEstimator(static_cast<std::size_t>(cfg.throughput_window));
      // Fixed draw count per peer keeps the stream aligned across policies.
      const bool mobile = uniform01(rng_peers_) < cfg.mobile_fraction;
      const double battery_u = uniform01(rng_peers_);
      p.device = mobile ? DeviceClass::Mobile : DeviceClass::Pc;
      p.battery_pct =
          mobile ? cfg.mobile_battery_min_pct + battery_u * (cfg.mobile_battery_max_pct - cfg.mobile_battery_min_pct)
                 : 100.0;
      p.channel = sample_channel(rng_peers_, catalog_);
      p.phase_s = uniform01(rng_peers_) * cfg.request_jitter_s;
      p.startup_buffer_s =
          cfg.startup_buffer_min_s + uniform01(rng_peers_) * (cfg.startup_buffer_max_s - cfg.startup_buffer_min_s);
      p.up = net_.add_link(cfg.peer_up_bps);
      p.down = net_.add_link(cfg.peer_down_bps);
      peers_.push_back(std::move(p));
    }
  }

  RunResult run() {
    if (cfg_.duration_s > 0.0) {
      push(0.0, EventKind::SegmentAvailable, 0);
      push(0.0, EventKind::ReportTick, 0);
    }
    for (std::size_t i = 0; i < peers_.size(); ++i) {
      if (peers_[i].session.join_s < cfg_.duration_s) push(peers_[i].session.join_s, EventKind::PeerJoin, i);
      if (peers_[i].session.leave_s < cfg_.duration_s) push(peers_[i].session.leave_s, EventKind::PeerLeave, i);
    }

    double last_time = 0.0;
    while (true) {
      const auto completion = net_.next_completion();
      const double next_event = queue_.empty() ? std::numeric_limits<double>::infinity() : queue_.top().time;
      if (completion && completion->time_s <= next_event) {
        now_ = std::max(completion->time_s, now_);
        net_.complete(completion->flow, now_);
        on_flow_complete(completion->flow);
      } else if (!queue_.empty()) {
        const Event ev = queue_.top();
        queue_.pop();
        now_ = ev.time;
        dispatch(ev);
      } else {
        break;
      }
      ++counters_.events;
      if (now_ < last_time) ++counters_.time_regressions;
      last_time = now_;
    }

    RunResult result;
    std::sort(trace_.begin(), trace_.end(),
              [](const RequestRecord& a, const RequestRecord& b) { return a.request_id < b.request_id; });
    counters_.max_link_utilization = net_.max_utilization();
    MetricsContext mctx{&cfg_.ladder, &tables_, cfg_.segment_duration_s,
                        {cfg_.qoe_switch_weight, cfg_.qoe_stall_weight}};
    result.summary = summarize(trace_, mctx);
    result.trace_hash = trace_hash(trace_);
    result.trace = std::move(trace_);
    result.counters = counters_;
    return result;
  }

 private:
  void push(double t, EventKind kind, std::uint64_t a, std::uint64_t b = 0) {
    queue_.push(Event{t, seq_++, kind, a, b});
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case EventKind::SegmentAvailable: on_segment(static_cast<std::int64_t>(ev.a)); break;
      case EventKind::ReportTick: on_report_tick(ev.a); break;
      case EventKind::PeerJoin: on_join(ev.a); break;
      case EventKind::PeerLeave: on_leave(ev.a); break;
      case EventKind::RequestIssued: on_request(ev.a); break;
      case EventKind::TranscodeCompleted: on_transcode_done(ev.a, ev.b); break;
    }
  }

  // ---- content and monitoring ----

  void on_segment(std::int64_t k) {
    newest_segment_ = k;
    const int rungs = static_cast<int>(cfg_.ladder.size());
    for (int c = 0; c < cfg_.channel_count; ++c)
      for (int r = 0; r < rungs; ++r)
        for (auto& cache : cdn_caches_)
          if (uniform01(rng_cdn_) < cfg_.cdn_cache_fraction) cache.insert({c, k, r});
    const std::int64_t first_live = k - cfg_.live_window_segments + 1;
    if (first_live > 0) {
      for (auto& cache : cdn_caches_) cache.prune_older_than(first_live);
      vts_cache_->prune_older_than(first_live);
      for (auto& p : peers_)
        if (p.alive) p.cache.prune_older_than(first_live);
    }
    const double next = static_cast<double>(k + 1) * cfg_.segment_duration_s;
    if (next < cfg_.duration_s) push(next, EventKind::SegmentAvailable, static_cast<std::uint64_t>(k + 1));
  }

  void on_report_tick(std::uint64_t tick) {
    for (auto& p : peers_) {
      if (!p.alive) continue;
      CmcdReport r;
      r.peer_id = p.id;
      r.role = overlay_.at(p.id).role;
      r.join_time_s = p.session.join_s;
      r.battery_pct = static_cast<int>(std::floor(p.battery_pct));
      r.device = p.device;
      r.playing = p.playing();
      r.cached = p.cache.snapshot().entries;
      r.last_mile_bps = static_cast<std::int64_t>(cfg_.peer_up_bps);
      if (apply_report(registry_, decode_report(encode_report(r)), now_)) ++counters_.reports_applied;
    }
    for (std::size_t c = 0; c < cdn_caches_.size(); ++c) {
      if (cdn_versions_.size() <= c) cdn_versions_.resize(c + 1, ~0ULL);
      if (cdn_versions_[c] == cdn_caches_[c].version()) continue;
      cdn_versions_[c] = cdn_caches_[c].version();
      const CacheSnapshot snap = cdn_caches_[c].snapshot();
      CmsdReport r;
      r.server_id = static_cast<NodeId>(c + 1);
      r.cached = snap.entries;
      r.fill_ratio = std::round(snap.fill_ratio * 1000.0) / 1000.0;
      if (apply_report(registry_, r, now_)) ++counters_.reports_applied;
    }
    const double next = static_cast<double>(tick + 1) * cfg_.monitoring_interval_s;
    if (next < cfg_.duration_s) push(next, EventKind::ReportTick, tick + 1);
  }

  // ---- membership ----

  void rebuild_group(int g) {
    auto& ids = overlay_.groups[static_cast<std::size_t>(g)];
    ids.clear();
    std::map<NodeId, double> joins;
    for (const auto& p : peers_)
      if (p.alive && p.group == g) {
        ids.push_back(p.id);
        joins[p.id] = p.session.join_s;
      }
    build_group_tree(overlay_, g, cfg_.seeder_fraction, joins);
    for (NodeId id : ids)
      if (NodeView* v = registry_.find_mutable(id)) v->role = overlay_.at(id).role;
  }

  void on_join(std::size_t i) {
    Peer& p = peers_[i];
    p.alive = true;
    p.buffer_updated_s = now_;
    NodeView v;
    v.node_id = p.id;
    v.kind = NodeKind::Peer;
    v.group_id = p.group;
    v.join_time_s = p.session.join_s;
    v.battery_pct = p.battery_pct;
    v.device = p.device;
    v.transcode_enabled = cfg_.peer_transcoding;
    v.transcode_slots_free = 1;
    v.report_time_s = now_;
    registry_.upsert(v);
    rebuild_group(p.group);
    p.next_segment = std::max<std::int64_t>(newest_segment_, 0);
    schedule_next_request(i);
  }

  void on_leave(std::size_t i) {
    Peer& p = peers_[i];
    if (!p.alive) return;
    p.alive = false;
    registry_.remove(p.id);
    overlay_.members.erase(p.id);
    std::vector<std::uint64_t> ids;
    for (const auto& [id, a] : active_) ids.push_back(id);
    for (std::uint64_t id : ids) {
      auto it = active_.find(id);
      if (it == active_.end()) continue;
      Active& a = it->second;
      if (a.client == i) {
        abandon(a);
      } else if (a.src_peer == i && (a.stage == Stage::PeerTranscode || a.stage == Stage::P2PFlow)) {
        ++counters_.departure_failures;
        fail_attempt(a);
      }
    }
    p.cache = LruCache(peer_cap_);
    p.uploads = 0;
    p.transcoding = false;
    rebuild_group(p.group);
  }

  // ---- player ----

  void update_buffer(Peer& p) {
    if (p.started && !p.stalled) {
      const double dt = now_ - p.buffer_updated_s;
      if (p.buffer_s > dt) {
        p.buffer_s -= dt;
      } else {
        p.stall_started_s = p.buffer_updated_s + p.buffer_s;
        p.buffer_s = 0.0;
        p.stalled = true;
      }
    }
    p.buffer_updated_s = now_;
  }

  void schedule_next_request(std::size_t i) {
    Peer& p = peers_[i];
    const double available = static_cast<double>(p.next_segment) * cfg_.segment_duration_s;
    double t = std::max(now_, available + p.phase_s);
    if (p.started && !p.stalled) {
      update_buffer(p);
      const double excess = p.buffer_s - cfg_.max_buffer_s;
      if (excess > 0.0) t = std::max(t, now_ + excess);
    }
    if (t >= cfg_.duration_s) return;
    push(t, EventKind::RequestIssued, i);
  }

  void on_request(std::size_t i) {
    Peer& p = peers_[i];
    if (!p.alive) return;
    update_buffer(p);
    const std::int64_t first_live = newest_segment_ - cfg_.live_window_segments + 1;
    if (p.next_segment < first_live) {
      p.pending_stall_s += static_cast<double>(newest_segment_ - p.next_segment) * cfg_.segment_duration_s;
      p.next_segment = newest_segment_;
    }

    PlayerState st;
    st.buffer_s = p.buffer_s;
    st.segment_duration_s = cfg_.segment_duration_s;
    st.last_rung = p.last_rung;
    st.throughput_est_bps = p.throughput.estimate_bps();
    st.stalled = p.stalled;
    const int rung = cfg_.abr == AbrKind::Bola ? bola_choose(st, cfg_.ladder, cfg_.bola)
                                               : hybrid_choose(st, cfg_.ladder, cfg_.hybrid_safety, cfg_.bola);

    const std::uint64_t id = next_request_id_++;
    Active a;
    a.client = i;
    a.rec.request_id = id;
    a.rec.issue_time_s = now_;
    a.rec.client_id = p.id;
    a.rec.ref = {p.channel, p.next_segment, rung};
    ++counters_.requests_issued;
    auto [it, inserted] = active_.emplace(id, std::move(a));
    start_attempt(it->second);
  }

  void deliver(Active& a) {
    Peer& p = peers_[a.client];
    RequestRecord& rec = a.rec;
    rec.status = RequestStatus::Served;
    rec.transmission_s = a.transmission;
    rec.computation_s = a.computation;
    rec.serving_latency_s = rec.transmission_s + rec.computation_s + rec.failed_attempt_s;
    const DeviceClass device = a.src_peer != kNone ? peers_[a.src_peer].device : DeviceClass::Edge;
    rec.delivered_vmaf = delivered_vmaf_of(a.decision, rec.ref, device, tables_, cfg_.ladder, cfg_.reference_vmaf);

    update_buffer(p);
    double stall = p.pending_stall_s;
    p.pending_stall_s = 0.0;
    if (p.stalled) {
      stall += now_ - p.stall_started_s;
      p.stalled = false;
    }
    rec.stall_contribution_s = stall;
    p.buffer_s += cfg_.segment_duration_s;
    if (!p.started && p.buffer_s >= p.startup_buffer_s) p.started = true;
    p.cache.insert(rec.ref);
    const double elapsed = now_ - rec.issue_time_s;
    if (elapsed > 0.0)
      p.throughput.add(static_cast<double>(ctx_.bytes_at(rec.ref.rung_index)) * 8.0, elapsed);
    p.last_rung = rec.ref.rung_index;
    ++p.next_segment;

    const std::size_t client = a.client;
    finish(a);
    schedule_next_request(client);
  }

  void finish(Active& a) {
    ++counters_.requests_completed;
    trace_.push_back(a.rec);
    active_.erase(a.rec.request_id);
  }

  // ---- decisions ----

  void refresh_live(const Peer& requester) {
    if (vts_cache_->version() != vts_version_) {
      vts_version_ = vts_cache_->version();
      vts_cached_ = vts_cache_->snapshot().entries;
      normalize_cached(vts_cached_);
    }
    for (auto& [id, v] : registry_.nodes_mutable()) {
      switch (v.kind) {
        case NodeKind::Peer: {
          if (v.group_id != requester.group) break;
          const Peer& p = peers_[id - peer_base_];
          v.available_bps = p.uploads < cfg_.peer_upload_slots ? net_.prospective_share(p.up) : 0.0;
          v.transcode_slots_free = p.transcoding ? 0 : 1;
          break;
        }
        case NodeKind::Cdn: v.available_bps = net_.prospective_share(cdn_links_[id - 1]); break;
        case NodeKind::Origin: v.available_bps = net_.prospective_share(origin_link_); break;
        case NodeKind::Vts:
          v.cached = vts_cached_;
          v.transcode_queue_length = static_cast<int>(vts_queue_.size());
          v.transcode_slots_free = cfg_.vts_transcode_slots - vts_busy_;
          v.mean_transcode_job_s = vts_mean_job_s_;
          v.report_time_s = now_;
          break;
      }
    }
  }

  NodeView requester_view(const Peer& p) const {
    NodeView v;
    if (const NodeView* known = registry_.find(p.id)) v = *known;
    v.node_id = p.id;
    v.kind = NodeKind::Peer;
    v.group_id = p.group;
    v.role = overlay_.at(p.id).role;
    v.available_bps = net_.prospective_share(p.down);
    return v;
  }

  std::size_t peer_index(NodeId id) const { return id - peer_base_; }

  bool still_valid(const Decision& d, const SegmentRef& ref) {
    auto hi = [&](int rung) { return SegmentRef{ref.channel_id, ref.segment_index, rung}; };
    switch (d.action) {
      case Action::P2PFetch: {
        Peer& s = peers_[peer_index(d.source)];
        return s.alive && s.uploads < cfg_.peer_upload_slots && s.cache.lookup(ref);
      }
      case Action::P2PTranscode: {
        Peer& s = peers_[peer_index(d.source)];
        return s.alive && cfg_.peer_transcoding && !s.transcoding && s.uploads < cfg_.peer_upload_slots &&
               s.battery_pct > cfg_.battery_threshold_pct && s.spent_pct < cfg_.battery_budget_pct &&
               s.cache.lookup(hi(*d.transcode_source_rung));
      }
      case Action::VtsFetch: return vts_cache_->lookup(ref);
      case Action::VtsTranscode: return vts_cache_->lookup(hi(*d.transcode_source_rung));
      case Action::CdnFetchVtsTranscode:
        return cdn_caches_[d.source - 1].lookup(hi(*d.transcode_source_rung));
      case Action::CdnFetch: return cdn_caches_[d.source - 1].lookup(ref);
      case Action::OriginFetch: return true;
    }
    return false;
  }

  void start_attempt(Active& a) {
    const Peer& client = peers_[a.client];
    while (true) {
      refresh_live(client);
      const Request req{a.rec.ref, requester_view(client)};
      a.decision = decide(req, registry_, cfg_.policy, ctx_, a.excluded);
      ++a.attempt;
      a.attempt_start = now_;
      a.transmission = 0.0;
      a.computation = 0.0;
      a.src_peer = kNone;
      a.rec.transcode_site = TranscodeSite::None;
      a.rec.transcode_job_s = 0.0;
      a.rec.transcoder_playing = false;
      a.rec.transcode_device = DeviceClass::Edge;
      a.rec.action = a.decision.action;
      a.rec.source = a.decision.source;
      a.rec.transcode_source_rung = a.decision.transcode_source_rung;
      a.rec.est_transmission_s = a.decision.est_transmission_s;
      a.rec.est_computation_s = a.decision.est_computation_s;
      a.rec.attempts = static_cast<int>(a.attempt);
      if (still_valid(a.decision, a.rec.ref)) break;
      ++counters_.stale_source_failures;
      a.excluded.insert(a.decision.action);
      note_redecision(a);
    }
    execute(a);
  }

  void note_redecision(Active& a) {
    ++a.redecisions;
    counters_.max_redecisions = std::max(counters_.max_redecisions, a.redecisions);
  }

  void fail_attempt(Active& a) {
    release(a);
    a.rec.failed_attempt_s += now_ - a.attempt_start;
    a.excluded.insert(a.decision.action);
    note_redecision(a);
    start_attempt(a);
  }

  void release(Active& a) {
    if (a.flow) {
      net_.cancel(*a.flow, now_);
      flow_owner_.erase(*a.flow);
      a.flow.reset();
    }
    if (a.src_peer != kNone) {
      Peer& s = peers_[a.src_peer];
      if (a.holds_upload) --s.uploads;
      if (a.holds_peer_transcoder) s.transcoding = false;
    }
    a.holds_upload = false;
    a.holds_peer_transcoder = false;
    if (a.stage == Stage::VtsQueued) {
      vts_queue_.erase(std::remove(vts_queue_.begin(), vts_queue_.end(), a.rec.request_id), vts_queue_.end());
    }
    if (a.holds_vts_slot) {
      a.holds_vts_slot = false;
      a.rec.transcode_job_s = now_ - a.stage_start;
      --vts_busy_;
      pump_vts();
    }
  }

  void abandon(Active& a) {
    ++counters_.abandoned;
    release(a);
    a.rec.status = RequestStatus::Failed;
    a.rec.transmission_s = a.transmission;
    a.rec.computation_s = a.computation;
    a.rec.failed_attempt_s += now_ - a.attempt_start;
    a.rec.serving_latency_s = a.rec.transmission_s + a.rec.computation_s + a.rec.failed_attempt_s;
    a.rec.delivered_vmaf = 0.0;
    finish(a);
  }

  // ---- execution ----

  void start_flow(Active& a, Stage stage, std::vector<LinkId> links, std::int64_t bytes) {
    a.stage = stage;
    a.stage_start = now_;
    const FlowId f = net_.start(std::move(links), static_cast<double>(bytes) * 8.0, now_);
    a.flow = f;
    flow_owner_[f] = a.rec.request_id;
  }

  void execute(Active& a) {
    const Decision& d = a.decision;
    const Peer& client = peers_[a.client];
    const int rung = a.rec.ref.rung_index;
    const std::int64_t bytes = ctx_.bytes_at(rung);
    switch (d.action) {
      case Action::P2PFetch: {
        a.src_peer = peer_index(d.source);
        ++peers_[a.src_peer].uploads;
        a.holds_upload = true;
        start_flow(a, Stage::P2PFlow, {peers_[a.src_peer].up, client.down}, bytes);
        break;
      }
      case Action::P2PTranscode: {
        a.src_peer = peer_index(d.source);
        Peer& s = peers_[a.src_peer];
        ++s.uploads;
        s.transcoding = true;
        a.holds_upload = true;
        a.holds_peer_transcoder = true;
        const auto& src = cfg_.ladder[static_cast<std::size_t>(*d.transcode_source_rung)];
        const auto& tgt = cfg_.ladder[static_cast<std::size_t>(rung)];
        const double job = tables_.transcode_time_per_segment(src, tgt, s.device);
        const PeerEnergy cost = tables_.peer_transcode_battery_per_segment(src, tgt, s.playing());
        s.spent_pct += cost.battery_pct;
        if (s.device == DeviceClass::Mobile) s.battery_pct = std::max(0.0, s.battery_pct - cost.battery_pct);
        if (NodeView* v = registry_.find_mutable(s.id)) v->transcode_battery_spent_pct = s.spent_pct;
        a.rec.transcode_site = TranscodeSite::Peer;
        a.rec.transcode_device = s.device;
        a.rec.transcode_job_s = job;
        a.rec.transcoder_playing = s.playing();
        a.stage = Stage::PeerTranscode;
        a.stage_start = now_;
        push(now_ + job, EventKind::TranscodeCompleted, a.rec.request_id, a.attempt);
        break;
      }
      case Action::VtsFetch: start_flow(a, Stage::Egress, {client.down}, bytes); break;
      case Action::VtsTranscode: submit_vts(a); break;
      case Action::CdnFetchVtsTranscode:
        start_flow(a, Stage::Ingress, {cdn_links_[d.source - 1]}, ctx_.bytes_at(*d.transcode_source_rung));
        break;
      case Action::CdnFetch: start_flow(a, Stage::Ingress, {cdn_links_[d.source - 1]}, bytes); break;
      case Action::OriginFetch: start_flow(a, Stage::Ingress, {origin_link_}, bytes); break;
    }
  }

  void submit_vts(Active& a) {
    a.stage = Stage::VtsQueued;
    a.stage_start = now_;
    a.rec.transcode_site = TranscodeSite::Edge;
    a.rec.transcode_device = DeviceClass::Edge;
    vts_queue_.push_back(a.rec.request_id);
    pump_vts();
  }

  void pump_vts() {
    while (vts_busy_ < cfg_.vts_transcode_slots && !vts_queue_.empty()) {
      const std::uint64_t id = vts_queue_.front();
      vts_queue_.pop_front();
      Active& a = active_.at(id);
      a.computation += now_ - a.stage_start;
      a.stage = Stage::VtsTranscode;
      a.stage_start = now_;
      a.holds_vts_slot = true;
      ++vts_busy_;
      const double job = tables_.transcode_time_per_segment(
          cfg_.ladder[static_cast<std::size_t>(*a.decision.transcode_source_rung)],
          cfg_.ladder[static_cast<std::size_t>(a.rec.ref.rung_index)], DeviceClass::Edge);
      a.rec.transcode_job_s = job;
      push(now_ + job, EventKind::TranscodeCompleted, id, a.attempt);
    }
  }

  void on_transcode_done(std::uint64_t id, std::uint64_t attempt) {
    auto it = active_.find(id);
    if (it == active_.end() || it->second.attempt != attempt) return;
    Active& a = it->second;
    a.computation += now_ - a.stage_start;
    if (a.stage == Stage::PeerTranscode) {
      peers_[a.src_peer].transcoding = false;
      a.holds_peer_transcoder = false;
      start_flow(a, Stage::P2PFlow, {peers_[a.src_peer].up, peers_[a.client].down},
                 ctx_.bytes_at(a.rec.ref.rung_index));
      return;
    }
    // Edge transcode finished.
    a.holds_vts_slot = false;
    --vts_busy_;
    ++vts_jobs_;
    vts_job_total_s_ += a.rec.transcode_job_s;
    vts_mean_job_s_ = vts_job_total_s_ / static_cast<double>(vts_jobs_);
    if (vts_caches_) vts_cache_->insert(a.rec.ref);
    start_flow(a, Stage::Egress, {peers_[a.client].down}, ctx_.bytes_at(a.rec.ref.rung_index));
    pump_vts();
  }

  void on_flow_complete(FlowId f) {
    auto owner = flow_owner_.find(f);
    if (owner == flow_owner_.end()) return;
    const std::uint64_t id = owner->second;
    flow_owner_.erase(owner);
    Active& a = active_.at(id);
    a.flow.reset();
    a.transmission += now_ - a.stage_start;
    switch (a.stage) {
      case Stage::P2PFlow:
        --peers_[a.src_peer].uploads;
        a.holds_upload = false;
        deliver(a);
        return;
      case Stage::Egress: deliver(a); return;
      case Stage::Ingress: {
        if (a.decision.action == Action::CdnFetchVtsTranscode) {
          if (vts_caches_)
            vts_cache_->insert({a.rec.ref.channel_id, a.rec.ref.segment_index, *a.decision.transcode_source_rung});
          submit_vts(a);
          return;
        }
        if (vts_caches_) vts_cache_->insert(a.rec.ref);
        start_flow(a, Stage::Egress, {peers_[a.client].down}, ctx_.bytes_at(a.rec.ref.rung_index));
        return;
      }
      default: return;
    }
  }

  const ScenarioConfig& cfg_;
  CostTables tables_;
  ChannelCatalog catalog_;
  DecisionContext ctx_;
  Rng rng_peers_, rng_cdn_, rng_churn_;
  bool vts_caches_ = false;
  std::size_t peer_cap_ = 1;

  FlowNetwork net_;
  std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  std::int64_t newest_segment_ = -1;

  NodeId origin_id_ = 0, vts_id_ = 0, peer_base_ = 0;
  LinkId origin_link_ = 0;
  std::vector<LinkId> cdn_links_;
  std::vector<LruCache> cdn_caches_;
  std::vector<std::uint64_t> cdn_versions_;
  std::optional<LruCache> vts_cache_;
  std::uint64_t vts_version_ = ~0ULL;
  std::vector<SegmentRef> vts_cached_;
  std::deque<std::uint64_t> vts_queue_;
  int vts_busy_ = 0;
  double vts_mean_job_s_ = 0.0;
  double vts_job_total_s_ = 0.0;
  std::uint64_t vts_jobs_ = 0;

  std::vector<Peer> peers_;
  Overlay overlay_;
  Registry registry_;

  std::map<std::uint64_t, Active> active_;
  std::map<FlowId, std::uint64_t> flow_owner_;
  std::uint64_t next_request_id_ = 0;
  std::vector<RequestRecord> trace_;
  RunCounters counters_;
};

}  // namespace

RunResult run(const ScenarioConfig& config) {
  config.validate();
  Engine engine(config);
  return engine.run();
}

}  // namespace hybridcdn
