#include "lorasim/air.hpp"

#include <cmath>

namespace lorasim {

void PropagationConfig::validate() const {
  if (!(d0 > 0.0)) throw ParameterError("propagation.d0 must be positive");
  if (!(n > 0.0)) throw ParameterError("propagation.n must be positive");
  if (sigma < 0.0) throw ParameterError("propagation.sigma must be non-negative");
  if (indoor_penetration_db < 0.0) {
    throw ParameterError("propagation.indoor_penetration_db must be non-negative");
  }
}

double path_loss(double distance_m, const PropagationConfig& cfg, double shadowing_draw) {
  if (!(distance_m > 0.0)) {
    throw ParameterError("distance must be positive");
  }
  return cfg.pl_d0 + 10.0 * cfg.n * std::log10(distance_m / cfg.d0) + shadowing_draw +
         cfg.indoor_penetration_db;
}

double noise_floor(double bw, double noise_figure_db) {
  if (!(bw > 0.0)) throw ParameterError("bandwidth must be positive");
  return -174.0 + 10.0 * std::log10(bw) + noise_figure_db;
}

double snr(double tx_power_dbm, double pl_db, double bw, double noise_figure_db) {
  return (tx_power_dbm - pl_db) - noise_floor(bw, noise_figure_db);
}

double Packet::critical_start() const {
  const int unlocked = params.preamble_len - 5;
  return start + unlocked * symbol_time(params.sf, params.bw);
}

bool destroys(const Packet& interferer, const Packet& victim) {
  if (interferer.freq != victim.freq || interferer.params.sf != victim.params.sf) {
    return false;
  }
  const bool hits_critical =
      interferer.start < victim.end() && interferer.end() > victim.critical_start();
  if (!hits_critical) {
    return false;
  }
  return victim.rss_at_gw < interferer.rss_at_gw + kCaptureThresholdDb;
}

std::vector<Outcome> arbitrate_collisions(std::span<const Packet> in_flight,
                                          const PhyTables& tables) {
  std::vector<Outcome> outcomes(in_flight.size(), Outcome::received);
  for (std::size_t v = 0; v < in_flight.size(); ++v) {
    const Packet& victim = in_flight[v];
    for (std::size_t i = 0; i < in_flight.size(); ++i) {
      if (i != v && destroys(in_flight[i], victim)) {
        outcomes[v] = Outcome::collided;
        break;
      }
    }
    if (outcomes[v] == Outcome::received &&
        (victim.snr_at_gw < snr_demod_floor(victim.params.sf, tables) ||
         victim.rss_at_gw < sensitivity(victim.params.sf, victim.params.bw, tables))) {
      outcomes[v] = Outcome::under_sensitivity;
    }
  }
  return outcomes;
}

}  // namespace lorasim
