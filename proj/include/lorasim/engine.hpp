#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "lorasim/air.hpp"
#include "lorasim/energy.hpp"
#include "lorasim/gateway.hpp"
#include "lorasim/mac.hpp"
#include "lorasim/metrics.hpp"
#include "lorasim/node.hpp"
#include "lorasim/rng.hpp"

namespace lorasim {

enum class EventKind {
  frame_ready,
  uplink_start,
  uplink_end,
  rx1_open,
  rx2_open,
  downlink_end,
  ack_timeout,
  measurement,
};

std::string_view to_string(EventKind kind);

inline constexpr int kGatewaySubject = -1;

struct Event {
  double time = 0.0;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::frame_ready;
  int subject = 0;  // node id, or kGatewaySubject
};

/// Min-queue ordered by (time, sequence). Sequence numbers are handed out on
/// push, so same-time events pop in insertion order.
class EventQueue {
 public:
  void push(double time, EventKind kind, int subject);
  Event pop();
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.sequence > b.sequence;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_sequence_ = 0;
};

struct SimulationConfig {
  int num_nodes = 100;
  double cell_radius_m = 1000.0;
  double horizon_days = 30.0;
  double lambda_bps = 0.02;
  int payload_len = 9;
  std::vector<double> channels{868.1e6, 868.3e6, 868.5e6};
  double node_duty_cycle = 0.01;
  double gateway_rx1_duty_cycle = 0.01;
  double gateway_rx2_duty_cycle = 0.10;
  int initial_tx_power_dbm = 14;
  std::optional<int> initial_sf;  // empty: uniform over SF7..SF12 per node
  bool adr_enabled = true;
  bool confirmed = false;
  MacSettings mac;
  AdrSettings adr;
  PropagationConfig propagation;
  PhyTables phy;
  EnergyProfile energy;
  std::uint64_t seed = 1;
  int replications = 1;
  bool redraw_placement = true;
  std::vector<Location> fixed_locations;  // overrides random placement
  double measurement_interval_s = 0.0;    // 0 disables snapshots

  double horizon_s() const { return horizon_days * 86400.0; }
  /// Throws ConfigError naming the offending field.
  void validate() const;
  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

/// Area-uniform placement over the cell disc around the gateway.
std::vector<Location> place_nodes(const SimulationConfig& cfg, Rng& rng);

struct TxRecord {
  int transmitter = 0;  // node id or kGatewaySubject
  std::string band;
  double duty_cycle_limit = 0.0;
  double start = 0.0;
  double airtime = 0.0;
};

struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::frame_ready;
  int subject = 0;
};

/// Full trace of a run, for post-hoc checks.
struct RunTrace {
  std::vector<TxRecord> transmissions;
  std::vector<EventRecord> events;
  std::vector<Packet> uplinks;  // with arbitrated outcomes
  std::vector<std::vector<StateInterval>> node_states;
  std::vector<double> uplink_end_times;  // per uplink, for window ordering checks
};

struct RunOptions {
  bool record_trace = false;
  std::optional<std::uint64_t> placement_seed;  // defaults to the run seed
};

struct RunResult {
  RunMetrics metrics;
  std::optional<RunTrace> trace;
};

/// Simulates one replication with seed `cfg.seed`.
RunResult run(const SimulationConfig& cfg, const RunOptions& options = {});

struct MonteCarloResult {
  std::vector<RunMetrics> runs;  // indexed by replication
  Stat der;
  Stat energy_per_byte;         // pooled over nodes of all replications
  Stat active_energy_per_byte;  // same, sleep excluded
  Stat collision_ratio;
  Stat acks_dropped;
  Stat retransmissions;
};

/// Runs cfg.replications independent replications, seeded by
/// replication_seed(cfg.seed, i), on up to `threads` workers. Aggregates are
/// folded in replication order, so they do not depend on the worker count.
MonteCarloResult monte_carlo(const SimulationConfig& cfg, int threads = 1);

/// Folds finished replications into the aggregate statistics.
MonteCarloResult aggregate(std::vector<RunMetrics> runs);

}  // namespace lorasim
