#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "lorasim/air.hpp"
#include "lorasim/energy.hpp"
#include "lorasim/mac.hpp"
#include "lorasim/node.hpp"
#include "lorasim/phy.hpp"

namespace lorasim {

/// Network-side ADR tuning, after The Things Network's defaults.
struct AdrSettings {
  std::size_t history_len = 20;
  double device_margin_db = 10.0;
  double step_db = 3.0;

  friend bool operator==(const AdrSettings&, const AdrSettings&) = default;
};

struct AdrDecision {
  DataRate target_dr;
  int target_power = 14;
  std::uint64_t issued_at = 0;  // uplinks accepted from the node so far
};

struct GatewayCounters {
  std::uint64_t uplinks_accepted = 0;
  std::uint64_t rejected_collided = 0;
  std::uint64_t rejected_under_sensitivity = 0;
  std::uint64_t downlinks_sent = 0;
  std::uint64_t downlinks_rx1 = 0;
  std::uint64_t downlinks_rx2 = 0;
  std::uint64_t downlinks_dropped = 0;
  std::uint64_t acks_dropped = 0;
  std::uint64_t adr_commands_sent = 0;
};

struct GatewayRecord {
  /// What the network knows about one device.
  struct NodeView {
    std::deque<double> snr_history;
    std::uint64_t frames_accepted = 0;
    bool adr_enabled = false;
    LoRaParams last_params;
    std::optional<std::uint64_t> last_seq;
    std::uint64_t acks_dropped = 0;
  };

  Location location;
  PhyTables tables;
  AdrSettings adr;
  MacSettings mac;
  TxPowerTable tx_power;
  std::vector<Band> bands;
  std::vector<NodeView> nodes;
  GatewayCounters counters;

  NodeView& view(int node_id);
  const NodeView* find(int node_id) const;
  Band* band_for(double freq);
};

/// European downlink bands: the uplink channels share one sub-band, RX2
/// sits in its own.
std::vector<Band> default_gateway_bands(const std::vector<double>& uplink_channels,
                                        double rx1_duty_cycle, double rx2_freq,
                                        double rx2_duty_cycle);

enum class Reception { accepted, collided, under_sensitivity };

struct ReceptionResult {
  Reception status = Reception::accepted;
  bool first_copy = false;  // first time this frame reached the network
};

/// Takes an arbitrated uplink. Accepted frames feed the node's SNR history.
ReceptionResult receive_uplink(GatewayRecord& gw, const Packet& pkt);

/// ADR verdict for a node once its history is full; empty when nothing
/// would change.
std::optional<AdrDecision> compute_adr(const GatewayRecord& gw, int node_id);

/// Picks the receive slot that costs the node the least energy among those
/// the gateway's duty cycle allows (RX1 on a tie). Returns empty when nothing
/// needs sending or both slots are blocked; the latter counts as a drop.
std::optional<Downlink> schedule_downlink(GatewayRecord& gw, const Packet& uplink,
                                          bool needs_ack, const std::optional<AdrDecision>& adr,
                                          const EnergyProfile& node_profile,
                                          std::uint64_t packet_id);

}  // namespace lorasim
