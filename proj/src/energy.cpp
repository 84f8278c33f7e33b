#include "lorasim/energy.hpp"

#include <iterator>
#include <string>

#include "lorasim/phy.hpp"

namespace lorasim {

std::string_view to_string(EnergyState state) {
  switch (state) {
    case EnergyState::sleep:
      return "sleep";
    case EnergyState::processing:
      return "processing";
    case EnergyState::tx_prep:
      return "tx_prep";
    case EnergyState::tx:
      return "tx";
    case EnergyState::wait_rx1:
      return "wait_rx1";
    case EnergyState::rx_prep:
      return "rx_prep";
    case EnergyState::rx1:
      return "rx1";
    case EnergyState::wait_rx2:
      return "wait_rx2";
    case EnergyState::rx2:
      return "rx2";
    case EnergyState::rx_post:
      return "rx_post";
  }
  return "unknown";
}

TxPowerTable::TxPowerTable()
    : TxPowerTable({{2, 91.8}, {5, 95.9}, {8, 101.6}, {11, 120.8}, {14, 146.5}}) {}

TxPowerTable::TxPowerTable(std::map<int, double> mw_by_dbm) : table_(std::move(mw_by_dbm)) {
  if (table_.empty()) {
    throw ParameterError("tx power table must not be empty");
  }
  double previous = -1.0;
  for (const auto& [dbm, mw] : table_) {
    if (!(mw > previous)) {
      throw ParameterError("tx consumption must strictly increase with output power");
    }
    previous = mw;
  }
}

double TxPowerTable::consumption_mw(int tx_power_dbm) const {
  auto it = table_.find(tx_power_dbm);
  if (it == table_.end()) {
    throw ParameterError("no consumption entry for " + std::to_string(tx_power_dbm) + " dBm");
  }
  return it->second;
}

int TxPowerTable::step_down(int tx_power_dbm) const {
  auto it = table_.find(tx_power_dbm);
  if (it == table_.end()) {
    throw ParameterError("no consumption entry for " + std::to_string(tx_power_dbm) + " dBm");
  }
  if (it == table_.begin()) {
    return tx_power_dbm;
  }
  return std::prev(it)->first;
}

void EnergyProfile::validate() const {
  const double powers[] = {sleep_mw,    processing_mw, tx_prep_mw, wait_rx1_mw, rx_prep_mw,
                           rx1_mw,      wait_rx2_mw,   rx2_mw,     rx_post_mw};
  for (double p : powers) {
    if (p < 0.0) {
      throw ParameterError("state powers must be non-negative");
    }
    if (p < sleep_mw) {
      throw ParameterError("sleep must be the lowest-power state");
    }
  }
  const double durations[] = {processing_s, tx_prep_s, wait_rx1_s, rx_delay2_s, rx_prep_s,
                              rx_post_s};
  for (double d : durations) {
    if (!(d > 0.0)) {
      throw ParameterError("fixed state durations must be positive");
    }
  }
}

double EnergyProfile::power_mw(EnergyState state, int tx_power_dbm) const {
  switch (state) {
    case EnergyState::sleep:
      return sleep_mw;
    case EnergyState::processing:
      return processing_mw;
    case EnergyState::tx_prep:
      return tx_prep_mw;
    case EnergyState::tx:
      return tx_power.consumption_mw(tx_power_dbm);
    case EnergyState::wait_rx1:
      return wait_rx1_mw;
    case EnergyState::rx_prep:
      return rx_prep_mw;
    case EnergyState::rx1:
      return rx1_mw;
    case EnergyState::wait_rx2:
      return wait_rx2_mw;
    case EnergyState::rx2:
      return rx2_mw;
    case EnergyState::rx_post:
      return rx_post_mw;
  }
  return 0.0;
}

void EnergyLedger::debit(EnergyState state, double power_mw, double duration_s) {
  const auto i = static_cast<std::size_t>(state);
  energy_mj[i] += power_mw * duration_s;
  residency_s[i] += duration_s;
}

double EnergyLedger::active_residency() const {
  double sum = 0.0;
  for (std::size_t i = 1; i < kEnergyStateCount; ++i) {
    sum += residency_s[i];
  }
  return sum;
}

double EnergyLedger::active_energy() const {
  double sum = 0.0;
  for (std::size_t i = 1; i < kEnergyStateCount; ++i) {
    sum += energy_mj[i];
  }
  return sum;
}

double EnergyLedger::total_energy() const {
  return energy_mj[static_cast<std::size_t>(EnergyState::sleep)] + active_energy();
}

void EnergyLedger::close(double period_s, double sleep_mw) {
  const double sleep_s = period_s - active_residency();
  if (sleep_s > 0.0) {
    debit(EnergyState::sleep, sleep_mw, sleep_s);
  }
}

}  // namespace lorasim
