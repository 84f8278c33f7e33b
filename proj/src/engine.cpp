#include "lorasim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

namespace lorasim {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::frame_ready: return "frame_ready";
    case EventKind::uplink_start: return "uplink_start";
    case EventKind::uplink_end: return "uplink_end";
    case EventKind::rx1_open: return "rx1_open";
    case EventKind::rx2_open: return "rx2_open";
    case EventKind::downlink_end: return "downlink_end";
    case EventKind::ack_timeout: return "ack_timeout";
    case EventKind::measurement: return "measurement";
  }
  return "unknown";
}

void EventQueue::push(double time, EventKind kind, int subject) {
  if (!std::isfinite(time)) {
    throw InvariantError("event scheduled at a non-finite time");
  }
  heap_.push(Event{time, next_sequence_++, kind, subject});
}

Event EventQueue::pop() {
  if (heap_.empty()) throw InvariantError("pop from an empty event queue");
  Event e = heap_.top();
  heap_.pop();
  return e;
}

void SimulationConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (num_nodes < 0) fail("num_nodes must be non-negative");
  if (!(cell_radius_m > 0.0)) fail("cell_radius_m must be positive");
  if (!(horizon_days > 0.0)) fail("horizon_days must be positive");
  if (!(lambda_bps > 0.0)) fail("lambda_bps must be positive");
  if (payload_len < 1 || payload_len + kMacOverheadBytes > kMaxPhyPayloadBytes) {
    fail("payload_len must be in [1, " + std::to_string(kMaxPhyPayloadBytes - kMacOverheadBytes) +
         "]");
  }
  if (channels.empty()) fail("channels must not be empty");
  for (double c : channels) {
    if (!(c > 0.0)) fail("channels must be positive frequencies");
  }
  for (std::size_t i = 0; i < channels.size(); ++i) {
    for (std::size_t j = i + 1; j < channels.size(); ++j) {
      if (channels[i] == channels[j]) fail("channels must be distinct");
    }
  }
  auto check_dc = [&](double dc, const char* name) {
    if (!(dc > 0.0 && dc <= 1.0)) fail(std::string(name) + " must be in (0, 1]");
  };
  check_dc(node_duty_cycle, "node_duty_cycle");
  check_dc(gateway_rx1_duty_cycle, "gateway_rx1_duty_cycle");
  check_dc(gateway_rx2_duty_cycle, "gateway_rx2_duty_cycle");
  if (initial_sf && (*initial_sf < kMinSf || *initial_sf > kMaxSf)) {
    fail("initial_sf must be in [7, 12]");
  }
  if (replications < 1) fail("replications must be at least 1");
  if (!fixed_locations.empty() &&
      fixed_locations.size() != static_cast<std::size_t>(num_nodes)) {
    fail("fixed_locations must list exactly num_nodes positions");
  }
  if (measurement_interval_s < 0.0) fail("measurement_interval_s must be non-negative");
  if (adr.history_len < 1) fail("adr.history_len must be at least 1");
  if (!(adr.step_db > 0.0)) fail("adr.step_db must be positive");
  auto section = [](std::string_view name, auto&& check) {
    try {
      check();
    } catch (const ParameterError& e) {
      const std::string what = e.what();
      if (what.starts_with(name)) throw ConfigError(what);
      throw ConfigError(std::string(name) + ": " + what);
    }
  };
  section("propagation", [&] { propagation.validate(); });
  section("phy", [&] { phy.validate(); });
  section("energy", [&] { energy.validate(); });
  section("mac", [&] { mac.validate(); });
  section("initial_sf", [&] {
    lorasim::validate(uplink_params(initial_sf.value_or(kMinSf), initial_tx_power_dbm));
  });
  if (!energy.tx_power.contains(initial_tx_power_dbm)) {
    fail("initial_tx_power_dbm has no entry in the transmit power table");
  }
}

std::vector<Location> place_nodes(const SimulationConfig& cfg, Rng& rng) {
  std::vector<Location> out;
  out.reserve(static_cast<std::size_t>(cfg.num_nodes));
  for (int i = 0; i < cfg.num_nodes; ++i) {
    const double r = cfg.cell_radius_m * std::sqrt(rng.uniform());
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    out.push_back({r * std::cos(theta), r * std::sin(theta)});
  }
  return out;
}

namespace {

constexpr double kMinDistanceM = 1.0;

struct NodeState {
  NodeState(Rng traffic_rng, Rng shadowing_rng, Rng timeouts_rng)
      : traffic(traffic_rng), shadowing(shadowing_rng), timeouts(timeouts_rng) {}

  NodeRecord rec;
  Rng traffic;
  Rng shadowing;
  Rng timeouts;
  double distance = 0.0;
  int initial_sf = 0;
  std::optional<ChannelChoice> choice;  // reserved for the next uplink_start
  std::optional<Packet> last_uplink;
  std::optional<Downlink> downlink;
  std::uint64_t unique_bytes_rx = 0;
  std::uint64_t unique_frames_rx = 0;
  std::uint64_t frames_received = 0;
  std::uint64_t frames_collided = 0;
  std::uint64_t frames_under_sensitivity = 0;
};

class Simulation {
 public:
  Simulation(const SimulationConfig& cfg, const RunOptions& options)
      : cfg_(cfg), horizon_(cfg.horizon_s()) {
    cfg_.validate();
    if (options.record_trace) trace_.emplace();

    std::vector<Location> locations = cfg_.fixed_locations;
    if (locations.empty()) {
      Rng placement =
          Rng::stream(options.placement_seed.value_or(cfg_.seed), -1, StreamPurpose::placement);
      locations = place_nodes(cfg_, placement);
    }

    gw_.tables = cfg_.phy;
    gw_.adr = cfg_.adr;
    gw_.mac = cfg_.mac;
    gw_.tx_power = cfg_.energy.tx_power;
    gw_.bands = default_gateway_bands(cfg_.channels, cfg_.gateway_rx1_duty_cycle,
                                      cfg_.mac.rx2_freq, cfg_.gateway_rx2_duty_cycle);

    nodes_.reserve(locations.size());
    for (std::size_t i = 0; i < locations.size(); ++i) {
      const auto id = static_cast<std::int64_t>(i);
      Rng init = Rng::stream(cfg_.seed, id, StreamPurpose::initial_params);
      const int sf = cfg_.initial_sf.value_or(init.uniform_int(kMinSf, kMaxSf));
      NodeState n(Rng::stream(cfg_.seed, id, StreamPurpose::traffic),
                  Rng::stream(cfg_.seed, id, StreamPurpose::shadowing),
                  Rng::stream(cfg_.seed, id, StreamPurpose::timeouts));
      n.rec.id = static_cast<int>(i);
      n.rec.location = locations[i];
      n.rec.profile = cfg_.energy;
      n.rec.params = uplink_params(sf, cfg_.initial_tx_power_dbm);
      n.rec.adr_enabled = cfg_.adr_enabled;
      n.rec.confirmed = cfg_.confirmed;
      n.rec.lambda_bps = cfg_.lambda_bps;
      n.rec.payload_len = cfg_.payload_len;
      n.rec.bands = default_node_bands(cfg_.channels, cfg_.node_duty_cycle);
      n.rec.mac = cfg_.mac;
      n.rec.trace_states = options.record_trace;
      n.distance = std::max(kMinDistanceM, locations[i].distance_to(gw_.location));
      n.initial_sf = sf;
      nodes_.push_back(std::move(n));
    }
  }

  RunResult execute() {
    for (NodeState& n : nodes_) {
      const double t = next_uplink_time(n.rec, 0.0, n.traffic);
      if (t < horizon_) queue_.push(t, EventKind::frame_ready, n.rec.id);
    }
    if (cfg_.measurement_interval_s > 0.0) {
      queue_.push(cfg_.measurement_interval_s, EventKind::measurement, kGatewaySubject);
    }

    while (!queue_.empty()) {
      const Event e = queue_.pop();
      if (e.time < now_) {
        throw InvariantError("event " + std::string(to_string(e.kind)) + " at " +
                             std::to_string(e.time) + " precedes clock " + std::to_string(now_));
      }
      now_ = e.time;
      if (trace_) trace_->events.push_back({e.time, e.kind, e.subject});
      dispatch(e);
    }
    return finish();
  }

 private:
  NodeState& node(int id) { return nodes_.at(static_cast<std::size_t>(id)); }

  void dispatch(const Event& e) {
    switch (e.kind) {
      case EventKind::frame_ready: {
        begin_frame(node(e.subject).rec);
        attempt_send(node(e.subject));
        break;
      }
      case EventKind::ack_timeout: attempt_send(node(e.subject)); break;
      case EventKind::uplink_start: on_uplink_start(node(e.subject)); break;
      case EventKind::uplink_end: on_uplink_end(node(e.subject)); break;
      case EventKind::rx1_open: on_rx1_open(node(e.subject)); break;
      case EventKind::rx2_open: on_rx2_open(node(e.subject)); break;
      case EventKind::downlink_end: finish_windows(node(e.subject)); break;
      case EventKind::measurement: on_measurement(); break;
    }
  }

  void attempt_send(NodeState& n) {
    const double ready = now_ + n.rec.profile.processing_s + n.rec.profile.tx_prep_s;
    n.choice = select_channel(n.rec, ready);
    queue_.push(n.choice->start, EventKind::uplink_start, n.rec.id);
  }

  void on_uplink_start(NodeState& n) {
    if (!n.choice) throw InvariantError("uplink start without a reserved channel");
    const Band& band = n.rec.bands.at(n.choice->band);
    Packet pkt = transmit(n.rec, *n.choice, now_, next_packet_id_++);
    n.choice.reset();
    const double shadow = cfg_.propagation.sigma * n.shadowing.normal();
    const double pl = path_loss(n.distance, cfg_.propagation, shadow);
    pkt.rss_at_gw = pkt.params.tx_power_dbm - pl;
    pkt.snr_at_gw = snr(pkt.params.tx_power_dbm, pl, pkt.params.bw, cfg_.phy.noise_figure_db);
    if (trace_) {
      trace_->transmissions.push_back(
          {n.rec.id, band.id, band.duty_cycle_limit, pkt.start, pkt.airtime});
    }
    air_.push_back(pkt);
    n.last_uplink = pkt;
    queue_.push(pkt.end(), EventKind::uplink_end, n.rec.id);
  }

  Outcome arbitrate(const Packet& victim) {
    // Everything that overlaps the victim started before it ended, so it is
    // already on air_.
    std::vector<Packet> group{victim};
    for (const Packet& p : air_) {
      if (p.id != victim.id && p.start < victim.end() && p.end() > victim.start) {
        group.push_back(p);
      }
    }
    return arbitrate_collisions(group, cfg_.phy).front();
  }

  void prune_air() {
    double oldest_active = now_;
    for (const Packet& p : air_) {
      if (p.end() > now_) oldest_active = std::min(oldest_active, p.start);
    }
    std::erase_if(air_, [&](const Packet& p) { return p.end() <= oldest_active; });
  }

  void on_uplink_end(NodeState& n) {
    Packet& pkt = *n.last_uplink;
    pkt.outcome = arbitrate(pkt);
    prune_air();
    if (trace_) {
      trace_->uplinks.push_back(pkt);
      trace_->uplink_end_times.push_back(now_);
    }

    const ReceptionResult rx = receive_uplink(gw_, pkt);
    switch (rx.status) {
      case Reception::accepted: ++n.frames_received; break;
      case Reception::collided: ++n.frames_collided; break;
      case Reception::under_sensitivity: ++n.frames_under_sensitivity; break;
    }
    const bool accepted = rx.status == Reception::accepted;
    if (rx.first_copy) {
      n.unique_bytes_rx += static_cast<std::uint64_t>(pkt.payload_len);
      ++n.unique_frames_rx;
    }

    std::optional<AdrDecision> adr;
    if (accepted) adr = compute_adr(gw_, n.rec.id);
    const bool needs_ack = accepted && pkt.confirmed;
    n.downlink = accepted ? schedule_downlink(gw_, pkt, needs_ack, adr, n.rec.profile,
                                              next_packet_id_)
                          : std::nullopt;
    if (n.downlink) {
      ++next_packet_id_;
      if (trace_) {
        const Band* b = gw_.band_for(n.downlink->packet.freq);
        trace_->transmissions.push_back({kGatewaySubject, b->id, b->duty_cycle_limit,
                                         n.downlink->packet.start, n.downlink->packet.airtime});
      }
    }
    queue_.push(pkt.end() + cfg_.mac.rx1_delay_s, EventKind::rx1_open, n.rec.id);
  }

  void on_rx1_open(NodeState& n) {
    if (n.downlink && n.downlink->slot == RxSlot::rx1) {
      queue_.push(n.downlink->packet.end(), EventKind::downlink_end, n.rec.id);
    } else {
      queue_.push(n.last_uplink->end() + cfg_.mac.rx2_delay_s, EventKind::rx2_open, n.rec.id);
    }
  }

  void on_rx2_open(NodeState& n) {
    if (n.downlink && n.downlink->slot == RxSlot::rx2) {
      queue_.push(n.downlink->packet.end(), EventKind::downlink_end, n.rec.id);
    } else {
      finish_windows(n);
    }
  }

  void finish_windows(NodeState& n) {
    const ReceiveResult r = run_receive_windows(n.rec, *n.last_uplink, n.downlink);
    n.downlink.reset();
    last_activity_ = std::max(last_activity_, r.windows_closed);
    const bool done = !n.rec.pending->confirmed || r.ack;
    if (done) {
      n.rec.pending.reset();
      schedule_next_frame(n, r.windows_closed);
      return;
    }
    const TimeoutResult t = handle_confirmed_timeout(n.rec, n.timeouts);
    if (t.action == TimeoutAction::give_up) {
      schedule_next_frame(n, r.windows_closed);
    } else {
      queue_.push(r.windows_closed + t.delay, EventKind::ack_timeout, n.rec.id);
    }
  }

  void schedule_next_frame(NodeState& n, double from) {
    const double t = next_uplink_time(n.rec, from, n.traffic);
    if (t < horizon_) queue_.push(t, EventKind::frame_ready, n.rec.id);
  }

  void on_measurement() {
    Snapshot s;
    s.time = now_;
    for (const NodeState& n : nodes_) {
      s.unique_bytes_tx += n.rec.counters.unique_bytes_tx;
      s.unique_bytes_rx += n.unique_bytes_rx;
      s.frames_tx += n.rec.counters.frames_tx;
      s.frames_collided += n.frames_collided;
    }
    snapshots_.push_back(s);
    const double next = now_ + cfg_.measurement_interval_s;
    if (next <= horizon_) queue_.push(next, EventKind::measurement, kGatewaySubject);
  }

  RunResult finish() {
    RunResult result;
    RunMetrics& m = result.metrics;
    m.seed = cfg_.seed;
    m.period_s = std::max({horizon_, now_, last_activity_});
    m.gateway = gw_.counters;
    m.snapshots = std::move(snapshots_);
    for (NodeState& n : nodes_) {
      if (n.rec.pending) {
        throw InvariantError("node " + std::to_string(n.rec.id) + " ended with a frame in flight");
      }
      n.rec.energy.close(m.period_s, n.rec.profile.sleep_mw);
      NodeMetrics nm;
      nm.node_id = n.rec.id;
      nm.distance_m = n.distance;
      nm.initial_sf = n.initial_sf;
      nm.final_sf = n.rec.params.sf;
      nm.final_tx_power_dbm = n.rec.params.tx_power_dbm;
      nm.unique_bytes_tx = n.rec.counters.unique_bytes_tx;
      nm.unique_bytes_rx = n.unique_bytes_rx;
      nm.unique_frames_tx = n.rec.counters.unique_frames_tx;
      nm.unique_frames_rx = n.unique_frames_rx;
      nm.frames_tx = n.rec.counters.frames_tx;
      nm.frames_received = n.frames_received;
      nm.frames_collided = n.frames_collided;
      nm.frames_under_sensitivity = n.frames_under_sensitivity;
      nm.retransmissions = n.rec.counters.retransmissions;
      nm.frames_unacked = n.rec.counters.frames_unacked;
      const auto* view = gw_.find(n.rec.id);
      nm.acks_dropped = view ? view->acks_dropped : 0;
      nm.adr_commands_applied = n.rec.counters.adr_commands_applied;
      nm.dr_backoffs = n.rec.counters.dr_backoffs;
      nm.energy = n.rec.energy;
      m.nodes.push_back(nm);
      if (trace_) trace_->node_states.push_back(std::move(n.rec.state_trace));
    }
    m.finalize();
    result.trace = std::move(trace_);
    return result;
  }

  SimulationConfig cfg_;
  double horizon_;
  double now_ = 0.0;
  double last_activity_ = 0.0;
  std::uint64_t next_packet_id_ = 0;
  EventQueue queue_;
  GatewayRecord gw_;
  std::vector<NodeState> nodes_;
  std::vector<Packet> air_;
  std::vector<Snapshot> snapshots_;
  std::optional<RunTrace> trace_;
};

}  // namespace

RunResult run(const SimulationConfig& cfg, const RunOptions& options) {
  return Simulation(cfg, options).execute();
}

MonteCarloResult monte_carlo(const SimulationConfig& cfg, int threads) {
  cfg.validate();
  const auto reps = static_cast<std::size_t>(cfg.replications);
  std::vector<RunMetrics> runs(reps);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < reps; i = next++) {
      try {
        SimulationConfig c = cfg;
        c.seed = replication_seed(cfg.seed, i);
        RunOptions opt;
        if (!cfg.redraw_placement) opt.placement_seed = cfg.seed;
        runs[i] = run(c, opt).metrics;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = reps;
      }
    }
  };

  const auto workers = static_cast<std::size_t>(std::clamp(threads, 1, cfg.replications));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return aggregate(std::move(runs));
}

MonteCarloResult aggregate(std::vector<RunMetrics> runs) {
  MonteCarloResult r;
  std::vector<double> der, collisions, acks, retx, epb, active;
  for (const RunMetrics& m : runs) {
    der.push_back(m.der);
    collisions.push_back(m.collision_ratio);
    acks.push_back(static_cast<double>(m.acks_dropped));
    retx.push_back(static_cast<double>(m.retransmissions));
    for (const NodeMetrics& n : m.nodes) {
      if (auto e = n.energy_per_byte()) epb.push_back(*e);
      if (auto e = n.active_energy_per_byte()) active.push_back(*e);
    }
  }
  r.der = summarize(der);
  r.collision_ratio = summarize(collisions);
  r.acks_dropped = summarize(acks);
  r.retransmissions = summarize(retx);
  r.energy_per_byte = summarize(epb);
  r.active_energy_per_byte = summarize(active);
  r.runs = std::move(runs);
  return r;
}

}  // namespace lorasim
