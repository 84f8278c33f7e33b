#include "lorasim/phy.hpp"

#include <algorithm>
#include <cmath>

namespace lorasim {

namespace {

void check_sf(int sf) {
  if (sf < kMinSf || sf > kMaxSf) {
    throw ParameterError("spreading factor must be in 7..12, got " + std::to_string(sf));
  }
}

void check_bw(double bw) {
  if (!(bw > 0.0)) {
    throw ParameterError("bandwidth must be positive");
  }
}

bool is_tx_power_state(int dbm) {
  return dbm == 2 || dbm == 5 || dbm == 8 || dbm == 11 || dbm == 14;
}

bool ldro_mandated(int sf, double bw) { return sf >= 11 && bw == kDefaultBandwidthHz; }

}  // namespace

LoRaParams uplink_params(int sf, int tx_power_dbm) {
  LoRaParams p;
  p.sf = sf;
  p.tx_power_dbm = tx_power_dbm;
  p.low_dr_opt = ldro_mandated(sf, p.bw);
  validate(p);
  return p;
}

LoRaParams downlink_params(int sf) {
  LoRaParams p = uplink_params(sf, 14);
  p.crc_on = false;
  return p;
}

void validate(const LoRaParams& params) {
  check_sf(params.sf);
  check_bw(params.bw);
  if (params.cr < 1 || params.cr > 4) {
    throw ParameterError("coding rate offset must be in 1..4");
  }
  if (params.preamble_len < 6) {
    throw ParameterError("preamble length must be at least 6 symbols");
  }
  if (!is_tx_power_state(params.tx_power_dbm)) {
    throw ParameterError("tx power " + std::to_string(params.tx_power_dbm) +
                         " dBm is not a supported power state");
  }
  if (ldro_mandated(params.sf, params.bw) && !params.low_dr_opt) {
    throw ParameterError("low data rate optimization is mandatory for SF11/SF12 at 125 kHz");
  }
}

int sf_of_dr(DataRate dr) {
  if (dr.index < kMinDataRate.index || dr.index > kMaxDataRate.index) {
    throw ParameterError("data rate index must be in 0..5");
  }
  return kMaxSf - dr.index;
}

DataRate dr_of_sf(int sf) {
  check_sf(sf);
  return DataRate{kMaxSf - sf};
}

bool Band::contains(double freq_hz) const {
  return std::find(channels.begin(), channels.end(), freq_hz) != channels.end();
}

void Band::record(double start, double airtime) {
  last_tx_end = start + airtime;
  next_allowed_tx = last_tx_end + time_off(airtime, duty_cycle_limit);
}

double symbol_time(int sf, double bw) {
  check_sf(sf);
  check_bw(bw);
  return std::ldexp(1.0, sf) / bw;
}

double airtime(const LoRaParams& params, int payload_len) {
  validate(params);
  if (payload_len < 0 || payload_len > kMaxPhyPayloadBytes) {
    throw ParameterError("payload length must be in 0..255 bytes");
  }
  const double t_sym = symbol_time(params.sf, params.bw);
  const int crc = params.crc_on ? 1 : 0;
  const int ih = params.explicit_header ? 0 : 1;
  const int de = params.low_dr_opt ? 1 : 0;

  const int numerator = 8 * payload_len - 4 * params.sf + 28 + 16 * crc - 20 * ih;
  const int denominator = 4 * (params.sf - 2 * de);
  // Integer ceiling; a negative numerator clamps to zero blocks below.
  const int blocks = numerator > 0 ? (numerator + denominator - 1) / denominator : 0;
  const double payload_symbols = 8.0 + std::max(blocks * (params.cr + 4), 0);
  const double preamble_symbols = params.preamble_len + 4.25;
  return (preamble_symbols + payload_symbols) * t_sym;
}

double frame_airtime(const LoRaParams& params, int app_payload_len) {
  return airtime(params, app_payload_len + kMacOverheadBytes);
}

double time_off(double airtime, double duty_cycle_limit) {
  if (!(duty_cycle_limit > 0.0) || duty_cycle_limit > 1.0) {
    throw ParameterError("duty cycle limit must be in (0, 1]");
  }
  if (airtime < 0.0) {
    throw ParameterError("airtime must be non-negative");
  }
  return airtime / duty_cycle_limit - airtime;
}

void PhyTables::validate() const {
  for (std::size_t i = 1; i < sensitivity_dbm.size(); ++i) {
    if (!(sensitivity_dbm[i] < sensitivity_dbm[i - 1])) {
      throw ParameterError("sensitivity table must strictly decrease with SF");
    }
    if (!(snr_floor_db[i] < snr_floor_db[i - 1])) {
      throw ParameterError("SNR floor table must strictly decrease with SF");
    }
  }
  if (noise_figure_db < 0.0) {
    throw ParameterError("noise figure must be non-negative");
  }
}

const PhyTables& default_phy_tables() {
  static const PhyTables tables{};
  return tables;
}

double sensitivity(int sf, double bw, const PhyTables& tables) {
  check_sf(sf);
  if (bw != kDefaultBandwidthHz) {
    throw ParameterError("sensitivity is only tabulated for 125 kHz");
  }
  return tables.sensitivity_dbm[static_cast<std::size_t>(sf - kMinSf)];
}

double snr_demod_floor(int sf, const PhyTables& tables) {
  check_sf(sf);
  return tables.snr_floor_db[static_cast<std::size_t>(sf - kMinSf)];
}

int RxTimeout::symbols(int sf, double bw) const {
  const double t_sym = symbol_time(sf, bw);
  const double needed = ((2 * min_symbols - 8) * t_sym + 2.0 * max_rx_error_s) / t_sym;
  return std::max(static_cast<int>(std::ceil(needed)), min_symbols);
}

}  // namespace lorasim
