#pragma once

#include <array>
#include <string>
#include <vector>

#include "lorasim/errors.hpp"

namespace lorasim {

inline constexpr int kMinSf = 7;
inline constexpr int kMaxSf = 12;
inline constexpr double kDefaultBandwidthHz = 125000.0;

/// LoRaWAN MAC overhead of a data frame: MHDR + FHDR + FPort + MIC.
inline constexpr int kMacOverheadBytes = 13;
inline constexpr int kMaxPhyPayloadBytes = 255;

struct LoRaParams {
  int sf = kMinSf;
  double bw = kDefaultBandwidthHz;
  int cr = 1;  // coding rate 4/(4+cr)
  int preamble_len = 8;
  bool explicit_header = true;
  bool crc_on = true;
  bool low_dr_opt = false;
  int tx_power_dbm = 14;

  friend bool operator==(const LoRaParams&, const LoRaParams&) = default;
};

/// Uplink defaults for the given SF and power, with the low data rate
/// optimization set as mandated for long symbols.
LoRaParams uplink_params(int sf, int tx_power_dbm);
/// Downlink frames carry no payload CRC.
LoRaParams downlink_params(int sf);

void validate(const LoRaParams& params);

/// LoRaWAN EU data rate index. DR0..DR5 map to SF12..SF7 at 125 kHz.
struct DataRate {
  int index = 0;
  friend auto operator<=>(const DataRate&, const DataRate&) = default;
};

inline constexpr DataRate kMinDataRate{0};
inline constexpr DataRate kMaxDataRate{5};

int sf_of_dr(DataRate dr);
DataRate dr_of_sf(int sf);

/// A regulatory sub-band with a shared duty-cycle budget.
struct Band {
  std::string id;
  double duty_cycle_limit = 0.01;
  std::vector<double> channels;
  double last_tx_end = 0.0;
  double next_allowed_tx = 0.0;

  bool contains(double freq_hz) const;
  bool permits(double t) const { return t >= next_allowed_tx; }
  /// Books a transmission of `airtime` seconds starting at `start`.
  void record(double start, double airtime);
};

double symbol_time(int sf, double bw);

/// Time on air of a frame whose PHY payload is `payload_len` bytes.
double airtime(const LoRaParams& params, int payload_len);

/// Time on air of a LoRaWAN data frame carrying `app_payload_len`
/// application bytes (MAC overhead added).
double frame_airtime(const LoRaParams& params, int app_payload_len);

/// Mandatory silence on a band after a transmission of `airtime` seconds.
double time_off(double airtime, double duty_cycle_limit);

/// Per-SF receiver tables (index 0 is SF7).
struct PhyTables {
  std::array<double, 6> sensitivity_dbm{-126.5, -129.0, -131.5, -134.0, -136.5, -139.5};
  std::array<double, 6> snr_floor_db{-7.5, -10.0, -12.5, -15.0, -17.5, -20.0};
  double noise_figure_db = 6.0;

  void validate() const;
  friend bool operator==(const PhyTables&, const PhyTables&) = default;
};

const PhyTables& default_phy_tables();

double sensitivity(int sf, double bw, const PhyTables& tables = default_phy_tables());
double snr_demod_floor(int sf, const PhyTables& tables = default_phy_tables());

/// Receive-window timeout (in symbols) when no preamble shows up, following
/// the LoRaMac-node computation: enough symbols to cover the worst-case
/// timing error on both window edges, at least `min_symbols`.
struct RxTimeout {
  int min_symbols = 6;
  double max_rx_error_s = 0.010;

  int symbols(int sf, double bw) const;
  double duration(int sf, double bw) const { return symbols(sf, bw) * symbol_time(sf, bw); }
  friend bool operator==(const RxTimeout&, const RxTimeout&) = default;
};

}  // namespace lorasim
