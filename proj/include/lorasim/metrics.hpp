#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lorasim/energy.hpp"
#include "lorasim/gateway.hpp"

namespace lorasim {

struct NodeMetrics {
  int node_id = 0;
  double distance_m = 0.0;
  int initial_sf = 0;
  int final_sf = 0;
  int final_tx_power_dbm = 0;
  std::uint64_t unique_bytes_tx = 0;
  std::uint64_t unique_bytes_rx = 0;
  std::uint64_t unique_frames_tx = 0;
  std::uint64_t unique_frames_rx = 0;
  std::uint64_t frames_tx = 0;
  std::uint64_t frames_received = 0;
  std::uint64_t frames_collided = 0;
  std::uint64_t frames_under_sensitivity = 0;
  std::uint64_t retransmissions = 0;
  std::uint64_t frames_unacked = 0;
  std::uint64_t acks_dropped = 0;
  std::uint64_t adr_commands_applied = 0;
  std::uint64_t dr_backoffs = 0;
  EnergyLedger energy;

  double der() const;
  /// Whole-horizon energy, sleep included, per unique payload byte.
  std::optional<double> energy_per_byte() const;
  /// Same, counting only the states the node enters because of traffic.
  std::optional<double> active_energy_per_byte() const;
};

/// Cumulative network counters at a measurement instant.
struct Snapshot {
  double time = 0.0;
  std::uint64_t unique_bytes_tx = 0;
  std::uint64_t unique_bytes_rx = 0;
  std::uint64_t frames_tx = 0;
  std::uint64_t frames_collided = 0;
};

struct RunMetrics {
  std::uint64_t seed = 0;
  double period_s = 0.0;  // accounting period every ledger was closed over
  std::vector<NodeMetrics> nodes;
  GatewayCounters gateway;
  std::vector<Snapshot> snapshots;

  // Aggregates, filled by finalize().
  std::uint64_t unique_bytes_tx = 0;
  std::uint64_t unique_bytes_rx = 0;
  std::uint64_t frames_tx = 0;
  std::uint64_t frames_received = 0;
  std::uint64_t frames_collided = 0;
  std::uint64_t frames_under_sensitivity = 0;
  std::uint64_t retransmissions = 0;
  std::uint64_t acks_dropped = 0;
  std::uint64_t frames_unacked = 0;
  double der = 1.0;  // mean of per-node DER over nodes that sent something
  double collision_ratio = 0.0;
  EnergyLedger energy;  // sum over nodes
  double energy_per_byte_mean = 0.0;
  double energy_per_byte_std = 0.0;
  double active_energy_per_byte_mean = 0.0;
  double active_energy_per_byte_std = 0.0;
  std::size_t nodes_with_traffic = 0;

  /// Recomputes every aggregate from `nodes`; throws InvariantError on any
  /// accounting inconsistency.
  void finalize();
};

/// Uniquely received over uniquely transmitted bytes; 0/0 counts as 1.
double der(std::uint64_t unique_rx_bytes, std::uint64_t unique_tx_bytes);

/// Energy per unique payload byte; empty when nothing was sent.
std::optional<double> energy_per_payload_byte(const EnergyLedger& ledger,
                                              std::uint64_t unique_bytes_tx,
                                              bool include_sleep = true);

struct Stat {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for n < 2
  double p05 = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
};

/// Summary of `values` in input order; percentiles by linear interpolation.
Stat summarize(std::span<const double> values);

}  // namespace lorasim
