#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lorasim/phy.hpp"

namespace lorasim {

/// Log-distance path loss with log-normal shadowing.
struct PropagationConfig {
  double d0 = 1000.0;
  double pl_d0 = 128.95;
  double n = 2.32;
  double sigma = 7.8;
  double indoor_penetration_db = 0.0;

  void validate() const;
  friend bool operator==(const PropagationConfig&, const PropagationConfig&) = default;
};

/// `shadowing_draw` is the already-scaled X_sigma sample in dB.
double path_loss(double distance_m, const PropagationConfig& cfg, double shadowing_draw);

/// Thermal noise floor plus receiver noise figure, in dBm.
double noise_floor(double bw, double noise_figure_db = 6.0);
double snr(double tx_power_dbm, double pl_db, double bw, double noise_figure_db = 6.0);

enum class Direction { uplink, downlink };
enum class Outcome { pending, received, collided, under_sensitivity };

struct Packet {
  std::uint64_t id = 0;
  int node_id = 0;
  int payload_len = 0;  // application bytes
  LoRaParams params;
  double freq = 0.0;
  double start = 0.0;
  double airtime = 0.0;
  double rss_at_gw = 0.0;
  double snr_at_gw = 0.0;
  Direction direction = Direction::uplink;
  bool confirmed = false;
  bool adr = false;  // ADR bit of the frame control field
  int attempt = 1;
  std::uint64_t frame_seq = 0;
  Outcome outcome = Outcome::pending;

  double end() const { return start + airtime; }
  /// Start of the part a receiver must see clean: the last five preamble
  /// symbols onward.
  double critical_start() const;
};

inline constexpr double kCaptureThresholdDb = 6.0;

/// True when `interferer` destroys `victim`: same channel and SF, present
/// during the victim's critical section, and the victim is not at least
/// the capture threshold stronger.
bool destroys(const Packet& interferer, const Packet& victim);

/// Resolves the outcome of every packet in `in_flight`. Each packet is judged
/// against all others independently, so the result does not depend on the
/// order of the input. Survivors below the SNR floor or the gateway
/// sensitivity are reported as under_sensitivity.
std::vector<Outcome> arbitrate_collisions(std::span<const Packet> in_flight,
                                          const PhyTables& tables = default_phy_tables());

}  // namespace lorasim
