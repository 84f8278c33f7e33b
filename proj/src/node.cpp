#include "lorasim/node.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lorasim {

double Location::distance_to(const Location& other) const {
  return std::hypot(x - other.x, y - other.y);
}

void NodeRecord::charge(EnergyState state, double power_mw, double start, double duration) {
  energy.debit(state, power_mw, duration);
  if (trace_states) {
    state_trace.push_back({state, start, duration, power_mw});
  }
}

std::vector<Band> default_node_bands(const std::vector<double>& channels, double duty_cycle) {
  std::vector<Band> bands;
  bands.reserve(channels.size());
  for (double ch : channels) {
    Band b;
    b.id = "ch" + std::to_string(static_cast<long long>(std::llround(ch / 1e3))) + "k";
    b.duty_cycle_limit = duty_cycle;
    b.channels = {ch};
    bands.push_back(std::move(b));
  }
  return bands;
}

double next_uplink_time(const NodeRecord& node, double now, Rng& rng) {
  return now + rng.exponential(node.mean_interval());
}

ChannelChoice select_channel(const NodeRecord& node, double now) {
  if (node.bands.empty()) {
    throw ParameterError("node has no channels configured");
  }
  std::optional<ChannelChoice> best;
  for (std::size_t b = 0; b < node.bands.size(); ++b) {
    const Band& band = node.bands[b];
    const double start = std::max(now, band.next_allowed_tx);
    for (double freq : band.channels) {
      if (!best || start < best->start || (start == best->start && freq < best->freq)) {
        best = ChannelChoice{freq, b, start};
      }
    }
  }
  return *best;
}

Frame& begin_frame(NodeRecord& node) {
  if (node.pending) {
    throw InvariantError("node " + std::to_string(node.id) + " started a frame while busy");
  }
  node.pending = Frame{node.next_seq++, node.payload_len, node.confirmed, 0};
  return *node.pending;
}

Packet transmit(NodeRecord& node, const ChannelChoice& choice, double start,
                std::uint64_t packet_id) {
  if (!node.pending) {
    throw InvariantError("node " + std::to_string(node.id) + " transmitted without a frame");
  }
  Band& band = node.bands.at(choice.band);
  if (!band.permits(start) || !band.contains(choice.freq)) {
    throw InvariantError("node " + std::to_string(node.id) + " violated the duty cycle on " +
                         band.id);
  }
  Frame& frame = *node.pending;
  ++frame.attempt;
  if (frame.attempt == 1) {
    node.counters.unique_bytes_tx += static_cast<std::uint64_t>(frame.payload_len);
    ++node.counters.unique_frames_tx;
  } else {
    ++node.counters.retransmissions;
  }
  ++node.counters.frames_tx;
  ++node.adr_ack_cnt;

  const EnergyProfile& p = node.profile;
  const double air = frame_airtime(node.params, frame.payload_len);
  const double wake = start - p.tx_prep_s - p.processing_s;
  node.charge(EnergyState::processing, p.processing_mw, wake, p.processing_s);
  node.charge(EnergyState::tx_prep, p.tx_prep_mw, wake + p.processing_s, p.tx_prep_s);
  node.charge(EnergyState::tx, p.tx_power.consumption_mw(node.params.tx_power_dbm), start, air);
  band.record(start, air);

  Packet pkt;
  pkt.id = packet_id;
  pkt.node_id = node.id;
  pkt.payload_len = frame.payload_len;
  pkt.params = node.params;
  pkt.freq = choice.freq;
  pkt.start = start;
  pkt.airtime = air;
  pkt.direction = Direction::uplink;
  pkt.confirmed = frame.confirmed;
  pkt.adr = node.adr_enabled;
  pkt.attempt = frame.attempt;
  pkt.frame_seq = frame.seq;
  return pkt;
}

ReceiveResult run_receive_windows(NodeRecord& node, const Packet& uplink,
                                  const std::optional<Downlink>& downlink) {
  ReceiveResult result;
  const std::optional<RxSlot> slot =
      downlink ? std::optional<RxSlot>(downlink->slot) : std::nullopt;
  const double dl_air = downlink ? downlink->packet.airtime : 0.0;

  double t = uplink.end();
  for (const StateSpan& span : receive_sequence(node.profile, node.mac, uplink.params, slot, dl_air)) {
    node.charge(span.state, span.power_mw, t, span.duration_s);
    result.energy_mj += span.power_mw * span.duration_s;
    t += span.duration_s;
    if (span.state == EnergyState::rx2) result.rx2_used = true;
  }
  result.windows_closed = t;

  if (downlink) {
    ++node.counters.downlinks_received;
    node.adr_ack_cnt = 0;
    if (downlink->ack && node.pending && node.pending->confirmed &&
        node.pending->seq == uplink.frame_seq) {
      ++node.counters.acks_received;
      result.ack = true;
    }
    if (downlink->command) {
      const auto status =
          apply_adr_command(node, downlink->command->dr, downlink->command->tx_power_dbm);
      result.command_applied = status == CommandStatus::applied;
    }
  } else if (node.adr_enabled && !uplink.confirmed && adr_backoff_due(node)) {
    result.backoff = lower_data_rate(node);
  }
  return result;
}

TimeoutResult handle_confirmed_timeout(NodeRecord& node, Rng& rng) {
  if (!node.pending || !node.pending->confirmed || node.pending->attempt < 1) {
    throw InvariantError("ACK timeout without an outstanding confirmed frame");
  }
  Frame& frame = *node.pending;
  if (frame.attempt >= node.mac.max_retries) {
    ++node.counters.frames_unacked;
    node.pending.reset();
    return {TimeoutAction::give_up, 0.0};
  }
  const int next_attempt = frame.attempt + 1;
  if (next_attempt >= 3 && next_attempt % 2 == 1) {
    lower_data_rate(node);
  }
  return {TimeoutAction::retransmit,
          rng.uniform(node.mac.ack_timeout_min_s, node.mac.ack_timeout_max_s)};
}

CommandStatus apply_adr_command(NodeRecord& node, DataRate new_dr, int new_power_dbm) {
  if (new_dr < kMinDataRate || new_dr > kMaxDataRate ||
      !node.profile.tx_power.contains(new_power_dbm)) {
    ++node.counters.adr_commands_malformed;
    return CommandStatus::malformed;
  }
  const int sf = sf_of_dr(new_dr);
  if (sf == node.params.sf && new_power_dbm == node.params.tx_power_dbm) {
    return CommandStatus::unchanged;
  }
  LoRaParams next = node.params;
  next.sf = sf;
  next.tx_power_dbm = new_power_dbm;
  next.low_dr_opt = uplink_params(sf, new_power_dbm).low_dr_opt;
  node.params = next;
  ++node.counters.adr_commands_applied;
  return CommandStatus::applied;
}

bool lower_data_rate(NodeRecord& node) {
  const DataRate dr = dr_of_sf(node.params.sf);
  if (dr <= kMinDataRate) {
    return false;
  }
  const int sf = node.params.sf + 1;
  node.params.sf = sf;
  node.params.low_dr_opt = uplink_params(sf, node.params.tx_power_dbm).low_dr_opt;
  ++node.counters.dr_backoffs;
  return true;
}

bool adr_backoff_due(const NodeRecord& node) {
  const int over = node.adr_ack_cnt - node.mac.adr_ack_limit;
  return over >= 0 && over % node.mac.adr_ack_delay == 0;
}

}  // namespace lorasim
