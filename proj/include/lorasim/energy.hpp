#pragma once

#include <array>
#include <map>
#include <string_view>

namespace lorasim {

/// Node power states, in the order a Class-A uplink cycle visits them.
enum class EnergyState {
  sleep,
  processing,
  tx_prep,
  tx,
  wait_rx1,
  rx_prep,
  rx1,
  wait_rx2,
  rx2,
  rx_post,
};

inline constexpr std::size_t kEnergyStateCount = 10;

std::string_view to_string(EnergyState state);

inline constexpr std::array<EnergyState, kEnergyStateCount> kAllEnergyStates{
    EnergyState::sleep,    EnergyState::processing, EnergyState::tx_prep, EnergyState::tx,
    EnergyState::wait_rx1, EnergyState::rx_prep,    EnergyState::rx1,     EnergyState::wait_rx2,
    EnergyState::rx2,      EnergyState::rx_post};

/// Radio consumption (mW) for each supported transmit power (dBm).
class TxPowerTable {
 public:
  TxPowerTable();
  explicit TxPowerTable(std::map<int, double> mw_by_dbm);

  /// Throws ParameterError for powers outside the table; there is no
  /// interpolation between states.
  double consumption_mw(int tx_power_dbm) const;
  bool contains(int tx_power_dbm) const { return table_.count(tx_power_dbm) != 0; }
  int min_dbm() const { return table_.begin()->first; }
  int max_dbm() const { return table_.rbegin()->first; }
  /// Next lower power state, or the same value at the bottom of the table.
  int step_down(int tx_power_dbm) const;
  const std::map<int, double>& entries() const { return table_; }

  friend bool operator==(const TxPowerTable&, const TxPowerTable&) = default;

 private:
  std::map<int, double> table_;
};

/// Per-state power draw and fixed durations of a node.
struct EnergyProfile {
  double sleep_mw = 5.7e-3;
  double processing_mw = 15.0;
  double processing_s = 0.005;
  double tx_prep_mw = 12.5;
  double tx_prep_s = 0.040;
  double wait_rx1_mw = 5.7e-3;
  double wait_rx1_s = 1.0;
  double rx_prep_mw = 8.25;
  double rx_prep_s = 0.0034;
  double rx1_mw = 36.96;
  double wait_rx2_mw = 5.7e-3;
  double rx_delay2_s = 1.0;  // RX2 opens this long after RX1
  double rx2_mw = 34.65;
  double rx_post_mw = 8.3;
  double rx_post_s = 0.0107;
  TxPowerTable tx_power;

  void validate() const;
  /// Power of `state`; the tx state needs the transmit power in dBm.
  double power_mw(EnergyState state, int tx_power_dbm = 14) const;

  friend bool operator==(const EnergyProfile&, const EnergyProfile&) = default;
};

/// Accumulated energy (mJ) and residency (s) per state.
struct EnergyLedger {
  std::array<double, kEnergyStateCount> energy_mj{};
  std::array<double, kEnergyStateCount> residency_s{};

  void debit(EnergyState state, double power_mw, double duration_s);
  double energy(EnergyState state) const { return energy_mj[static_cast<std::size_t>(state)]; }
  double residency(EnergyState state) const {
    return residency_s[static_cast<std::size_t>(state)];
  }
  double active_residency() const;
  double active_energy() const;
  double total_energy() const;
  /// Charges sleep for everything not spent in another state over `period_s`.
  void close(double period_s, double sleep_mw);
};

}  // namespace lorasim
