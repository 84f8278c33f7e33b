#include "lorasim/mac.hpp"

namespace lorasim {

void MacSettings::validate() const {
  if (max_retries < 1) throw ParameterError("mac.max_retries must be at least 1");
  if (!(ack_timeout_min_s >= 0.0) || ack_timeout_max_s < ack_timeout_min_s) {
    throw ParameterError("mac ack timeout range is invalid");
  }
  if (adr_ack_limit < 1 || adr_ack_delay < 1) {
    throw ParameterError("mac ADR ack limit and delay must be positive");
  }
  if (!(rx1_delay_s > 0.0) || !(rx2_delay_s > rx1_delay_s)) {
    throw ParameterError("mac receive delays must satisfy 0 < rx1 < rx2");
  }
  sf_of_dr(rx2_dr);
  if (rx_timeout.min_symbols < 1 || rx_timeout.max_rx_error_s < 0.0) {
    throw ParameterError("mac rx timeout is invalid");
  }
}

LoRaParams downlink_params_for(RxSlot slot, const LoRaParams& uplink, const MacSettings& mac) {
  const int sf = slot == RxSlot::rx1 ? uplink.sf : sf_of_dr(mac.rx2_dr);
  return downlink_params(sf);
}

int downlink_phy_payload(bool has_command, const MacSettings& mac) {
  return kMacOverheadBytes + (has_command ? mac.mac_command_bytes : 0);
}

std::vector<StateSpan> receive_sequence(const EnergyProfile& profile, const MacSettings& mac,
                                        const LoRaParams& uplink, std::optional<RxSlot> slot,
                                        double dl_airtime) {
  std::vector<StateSpan> spans;
  spans.reserve(7);
  spans.push_back({EnergyState::wait_rx1, profile.wait_rx1_mw, profile.wait_rx1_s});
  spans.push_back({EnergyState::rx_prep, profile.rx_prep_mw, profile.rx_prep_s});
  const double rx1_listen = slot == RxSlot::rx1
                                ? dl_airtime
                                : mac.rx_timeout.duration(uplink.sf, uplink.bw);
  spans.push_back({EnergyState::rx1, profile.rx1_mw, rx1_listen});
  if (slot != RxSlot::rx1) {
    // RX2 opens a fixed delay after RX1, so the wait shrinks by the RX1 listen.
    const double wait = profile.rx_delay2_s - rx1_listen;
    spans.push_back({EnergyState::wait_rx2, profile.wait_rx2_mw, wait > 0.0 ? wait : 0.0});
    spans.push_back({EnergyState::rx_prep, profile.rx_prep_mw, profile.rx_prep_s});
    const int rx2_sf = sf_of_dr(mac.rx2_dr);
    const double rx2_listen = slot == RxSlot::rx2
                                  ? dl_airtime
                                  : mac.rx_timeout.duration(rx2_sf, kDefaultBandwidthHz);
    spans.push_back({EnergyState::rx2, profile.rx2_mw, rx2_listen});
  }
  if (slot) {
    spans.push_back({EnergyState::rx_post, profile.rx_post_mw, profile.rx_post_s});
  }
  return spans;
}

double receive_energy(const EnergyProfile& profile, const MacSettings& mac,
                      const LoRaParams& uplink, std::optional<RxSlot> slot, double dl_airtime) {
  double sum = 0.0;
  for (const auto& span : receive_sequence(profile, mac, uplink, slot, dl_airtime)) {
    sum += span.power_mw * span.duration_s;
  }
  return sum;
}

}  // namespace lorasim
