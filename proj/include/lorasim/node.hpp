#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lorasim/air.hpp"
#include "lorasim/energy.hpp"
#include "lorasim/mac.hpp"
#include "lorasim/phy.hpp"
#include "lorasim/rng.hpp"

namespace lorasim {

struct Location {
  double x = 0.0;
  double y = 0.0;
  double distance_to(const Location& other) const;
  friend bool operator==(const Location&, const Location&) = default;
};

/// An application payload on its way through the MAC.
struct Frame {
  std::uint64_t seq = 0;
  int payload_len = 0;
  bool confirmed = false;
  int attempt = 0;  // transmissions so far
};

struct NodeCounters {
  std::uint64_t unique_bytes_tx = 0;
  std::uint64_t unique_frames_tx = 0;
  std::uint64_t frames_tx = 0;
  std::uint64_t retransmissions = 0;
  std::uint64_t frames_unacked = 0;  // confirmed frames given up after max retries
  std::uint64_t acks_received = 0;
  std::uint64_t downlinks_received = 0;
  std::uint64_t adr_commands_applied = 0;
  std::uint64_t adr_commands_malformed = 0;
  std::uint64_t dr_backoffs = 0;
};

/// One entry of the optional per-node power trace.
struct StateInterval {
  EnergyState state;
  double start;
  double duration;
  double power_mw;
};

struct NodeRecord {
  int id = 0;
  Location location;
  EnergyProfile profile;
  LoRaParams params;
  bool adr_enabled = false;
  bool confirmed = false;
  double lambda_bps = 0.02;
  int payload_len = 9;
  std::vector<Band> bands;
  MacSettings mac;
  int adr_ack_cnt = 0;
  std::optional<Frame> pending;
  std::uint64_t next_seq = 0;
  EnergyLedger energy;
  NodeCounters counters;
  bool trace_states = false;
  std::vector<StateInterval> state_trace;

  /// Mean time between frames so that the long-run bit rate is lambda_bps.
  double mean_interval() const { return payload_len * 8.0 / lambda_bps; }
  /// Debits `duration` seconds at `power` and, when tracing, logs the span.
  void charge(EnergyState state, double power_mw, double start, double duration);
};

/// European default uplink bands: one 1 % ledger per channel.
std::vector<Band> default_node_bands(const std::vector<double>& channels, double duty_cycle);

double next_uplink_time(const NodeRecord& node, double now, Rng& rng);

struct ChannelChoice {
  double freq = 0.0;
  std::size_t band = 0;
  double start = 0.0;
};

/// Channel whose band frees up first; transmission is deferred until then.
/// Ties go to the lowest frequency.
ChannelChoice select_channel(const NodeRecord& node, double now);

/// Starts the next frame: assigns a sequence number and clears the attempt
/// counter. The previous frame must be finished.
Frame& begin_frame(NodeRecord& node);

/// Emits the pending frame on `choice` at `start`. Throws InvariantError if
/// the band's duty-cycle budget does not permit it.
Packet transmit(NodeRecord& node, const ChannelChoice& choice, double start,
                std::uint64_t packet_id);

struct ReceiveResult {
  double energy_mj = 0.0;
  double windows_closed = 0.0;  // absolute time the node is done listening
  bool rx2_used = false;
  bool ack = false;
  bool command_applied = false;
  bool backoff = false;
};

/// Runs both Class-A windows after `uplink`, debiting the listen energy and
/// applying whatever the downlink carries.
ReceiveResult run_receive_windows(NodeRecord& node, const Packet& uplink,
                                  const std::optional<Downlink>& downlink);

enum class TimeoutAction { retransmit, give_up };

struct TimeoutResult {
  TimeoutAction action = TimeoutAction::give_up;
  double delay = 0.0;  // wait before the retransmission is attempted
};

/// Called when a confirmed frame's windows closed without an ACK.
TimeoutResult handle_confirmed_timeout(NodeRecord& node, Rng& rng);

enum class CommandStatus { applied, unchanged, malformed };

/// Network-issued parameter change; the network may move the data rate in
/// either direction.
CommandStatus apply_adr_command(NodeRecord& node, DataRate new_dr, int new_power_dbm);

/// Node-initiated change: can only lower the data rate. Returns false at DR0.
bool lower_data_rate(NodeRecord& node);

/// Node-side backoff when the network stays silent on ADR traffic: one step
/// down at adr_ack_limit unanswered uplinks and every adr_ack_delay after.
bool adr_backoff_due(const NodeRecord& node);

}  // namespace lorasim
