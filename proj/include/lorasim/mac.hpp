#pragma once

#include <optional>
#include <vector>

#include "lorasim/air.hpp"
#include "lorasim/energy.hpp"
#include "lorasim/phy.hpp"

namespace lorasim {

/// Class-A MAC constants shared by nodes and the network.
struct MacSettings {
  int max_retries = 8;  // total transmissions of a confirmed frame
  double ack_timeout_min_s = 1.0;
  double ack_timeout_max_s = 3.0;
  int adr_ack_limit = 64;
  int adr_ack_delay = 32;
  double rx1_delay_s = 1.0;
  double rx2_delay_s = 2.0;
  double rx2_freq = 868.525e6;
  DataRate rx2_dr{3};
  int mac_command_bytes = 5;  // LinkADRReq
  RxTimeout rx_timeout;

  void validate() const;
  friend bool operator==(const MacSettings&, const MacSettings&) = default;
};

enum class RxSlot { rx1, rx2 };

struct AdrCommand {
  DataRate dr;
  int tx_power_dbm = 14;
};

struct Downlink {
  Packet packet;
  RxSlot slot = RxSlot::rx1;
  bool ack = false;
  std::optional<AdrCommand> command;
};

/// Params a downlink uses in `slot` after an uplink sent with `uplink`.
LoRaParams downlink_params_for(RxSlot slot, const LoRaParams& uplink, const MacSettings& mac);

/// PHY payload of a downlink: no application bytes, MAC commands ride in FOpts.
int downlink_phy_payload(bool has_command, const MacSettings& mac);

struct StateSpan {
  EnergyState state;
  double power_mw;
  double duration_s;
};

/// Ordered power states a node goes through from uplink end until its
/// receive windows close. `slot` says where a downlink of `dl_airtime`
/// seconds arrives; empty means both windows time out.
std::vector<StateSpan> receive_sequence(const EnergyProfile& profile, const MacSettings& mac,
                                        const LoRaParams& uplink, std::optional<RxSlot> slot,
                                        double dl_airtime);

/// Node energy (mJ) spent from uplink end until the receive windows close,
/// when a downlink of `dl_airtime` seconds arrives in `slot`, or when no
/// downlink arrives at all (`slot` empty).
double receive_energy(const EnergyProfile& profile, const MacSettings& mac,
                      const LoRaParams& uplink, std::optional<RxSlot> slot, double dl_airtime);

}  // namespace lorasim
