#include "lorasim/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lorasim {

GatewayRecord::NodeView& GatewayRecord::view(int node_id) {
  if (node_id < 0) throw InvariantError("negative node id");
  const auto i = static_cast<std::size_t>(node_id);
  if (i >= nodes.size()) nodes.resize(i + 1);
  return nodes[i];
}

const GatewayRecord::NodeView* GatewayRecord::find(int node_id) const {
  if (node_id < 0 || static_cast<std::size_t>(node_id) >= nodes.size()) return nullptr;
  return &nodes[static_cast<std::size_t>(node_id)];
}

Band* GatewayRecord::band_for(double freq) {
  for (Band& b : bands) {
    if (b.contains(freq)) return &b;
  }
  return nullptr;
}

std::vector<Band> default_gateway_bands(const std::vector<double>& uplink_channels,
                                        double rx1_duty_cycle, double rx2_freq,
                                        double rx2_duty_cycle) {
  Band rx1;
  rx1.id = "rx1";
  rx1.duty_cycle_limit = rx1_duty_cycle;
  rx1.channels = uplink_channels;
  Band rx2;
  rx2.id = "rx2";
  rx2.duty_cycle_limit = rx2_duty_cycle;
  rx2.channels = {rx2_freq};
  return {rx1, rx2};
}

ReceptionResult receive_uplink(GatewayRecord& gw, const Packet& pkt) {
  switch (pkt.outcome) {
    case Outcome::pending:
      throw InvariantError("gateway got an unarbitrated packet");
    case Outcome::collided:
      ++gw.counters.rejected_collided;
      return {Reception::collided, false};
    case Outcome::under_sensitivity:
      ++gw.counters.rejected_under_sensitivity;
      return {Reception::under_sensitivity, false};
    case Outcome::received:
      break;
  }
  ++gw.counters.uplinks_accepted;
  auto& v = gw.view(pkt.node_id);
  v.snr_history.push_back(pkt.snr_at_gw);
  while (v.snr_history.size() > gw.adr.history_len) {
    v.snr_history.pop_front();
  }
  ++v.frames_accepted;
  v.last_params = pkt.params;
  v.adr_enabled = pkt.adr;
  const bool first = !v.last_seq || *v.last_seq != pkt.frame_seq;
  v.last_seq = pkt.frame_seq;
  return {Reception::accepted, first};
}

std::optional<AdrDecision> compute_adr(const GatewayRecord& gw, int node_id) {
  const auto* v = gw.find(node_id);
  if (v == nullptr || !v->adr_enabled || v->snr_history.size() < gw.adr.history_len) {
    return std::nullopt;
  }
  const double best = *std::max_element(v->snr_history.begin(), v->snr_history.end());
  const int sf = v->last_params.sf;
  const double margin = best - snr_demod_floor(sf, gw.tables) - gw.adr.device_margin_db;
  int steps = static_cast<int>(std::floor(margin / gw.adr.step_db));

  DataRate dr = dr_of_sf(sf);
  int power = v->last_params.tx_power_dbm;
  while (steps > 0 && dr < kMaxDataRate) {
    ++dr.index;
    --steps;
  }
  while (steps > 0 && power > gw.tx_power.min_dbm()) {
    power = gw.tx_power.step_down(power);
    --steps;
  }
  if (dr == dr_of_sf(sf) && power == v->last_params.tx_power_dbm) {
    return std::nullopt;
  }
  return AdrDecision{dr, power, v->frames_accepted};
}

std::optional<Downlink> schedule_downlink(GatewayRecord& gw, const Packet& uplink,
                                          bool needs_ack, const std::optional<AdrDecision>& adr,
                                          const EnergyProfile& node_profile,
                                          std::uint64_t packet_id) {
  if (!needs_ack && !adr) {
    return std::nullopt;
  }
  struct Option {
    RxSlot slot;
    LoRaParams params;
    double freq;
    double time;
    double air;
    double cost;
    Band* band;
  };
  const int payload = downlink_phy_payload(adr.has_value(), gw.mac);
  std::optional<Option> best;
  for (RxSlot slot : {RxSlot::rx1, RxSlot::rx2}) {
    Option o{slot, downlink_params_for(slot, uplink.params, gw.mac), 0.0, 0.0, 0.0, 0.0, nullptr};
    o.freq = slot == RxSlot::rx1 ? uplink.freq : gw.mac.rx2_freq;
    o.time = uplink.end() + (slot == RxSlot::rx1 ? gw.mac.rx1_delay_s : gw.mac.rx2_delay_s);
    o.air = airtime(o.params, payload);
    o.cost = receive_energy(node_profile, gw.mac, uplink.params, slot, o.air);
    o.band = gw.band_for(o.freq);
    if (o.band == nullptr || !o.band->permits(o.time)) {
      continue;
    }
    if (!best || o.cost < best->cost) {
      best = o;
    }
  }

  if (!best) {
    ++gw.counters.downlinks_dropped;
    if (needs_ack) {
      ++gw.counters.acks_dropped;
      ++gw.view(uplink.node_id).acks_dropped;
    }
    return std::nullopt;
  }

  best->band->record(best->time, best->air);
  ++gw.counters.downlinks_sent;
  ++(best->slot == RxSlot::rx1 ? gw.counters.downlinks_rx1 : gw.counters.downlinks_rx2);

  Downlink dl;
  dl.slot = best->slot;
  dl.ack = needs_ack;
  dl.packet.id = packet_id;
  dl.packet.node_id = uplink.node_id;
  dl.packet.params = best->params;
  dl.packet.freq = best->freq;
  dl.packet.start = best->time;
  dl.packet.airtime = best->air;
  dl.packet.direction = Direction::downlink;
  dl.packet.frame_seq = uplink.frame_seq;
  // Downlinks are assumed to always reach the node.
  dl.packet.outcome = Outcome::received;
  if (adr) {
    dl.command = AdrCommand{adr->target_dr, adr->target_power};
    ++gw.counters.adr_commands_sent;
    // The next verdict is based on uplinks sent with the new settings.
    gw.view(uplink.node_id).snr_history.clear();
  }
  return dl;
}

}  // namespace lorasim
