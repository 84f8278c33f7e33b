#include "lorasim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lorasim {

double der(std::uint64_t unique_rx_bytes, std::uint64_t unique_tx_bytes) {
  if (unique_rx_bytes > unique_tx_bytes) {
    throw InvariantError("received " + std::to_string(unique_rx_bytes) +
                         " unique bytes but only sent " + std::to_string(unique_tx_bytes));
  }
  if (unique_tx_bytes == 0) return 1.0;
  return static_cast<double>(unique_rx_bytes) / static_cast<double>(unique_tx_bytes);
}

std::optional<double> energy_per_payload_byte(const EnergyLedger& ledger,
                                              std::uint64_t unique_bytes_tx,
                                              bool include_sleep) {
  if (unique_bytes_tx == 0) return std::nullopt;
  const double e = include_sleep ? ledger.total_energy() : ledger.active_energy();
  return e / static_cast<double>(unique_bytes_tx);
}

double NodeMetrics::der() const { return lorasim::der(unique_bytes_rx, unique_bytes_tx); }

std::optional<double> NodeMetrics::energy_per_byte() const {
  return energy_per_payload_byte(energy, unique_bytes_tx, true);
}

std::optional<double> NodeMetrics::active_energy_per_byte() const {
  return energy_per_payload_byte(energy, unique_bytes_tx, false);
}

void RunMetrics::finalize() {
  unique_bytes_tx = unique_bytes_rx = frames_tx = frames_received = frames_collided = 0;
  frames_under_sensitivity = retransmissions = acks_dropped = frames_unacked = 0;
  energy = EnergyLedger{};
  nodes_with_traffic = 0;

  double der_sum = 0.0;
  std::vector<double> epb;
  std::vector<double> active_epb;
  for (const NodeMetrics& n : nodes) {
    if (n.frames_received + n.frames_collided + n.frames_under_sensitivity != n.frames_tx) {
      throw InvariantError("node " + std::to_string(n.node_id) +
                           ": arbitrated outcomes do not add up to frames sent");
    }
    unique_bytes_tx += n.unique_bytes_tx;
    unique_bytes_rx += n.unique_bytes_rx;
    frames_tx += n.frames_tx;
    frames_received += n.frames_received;
    frames_collided += n.frames_collided;
    frames_under_sensitivity += n.frames_under_sensitivity;
    retransmissions += n.retransmissions;
    acks_dropped += n.acks_dropped;
    frames_unacked += n.frames_unacked;
    for (std::size_t s = 0; s < kEnergyStateCount; ++s) {
      energy.energy_mj[s] += n.energy.energy_mj[s];
      energy.residency_s[s] += n.energy.residency_s[s];
    }
    if (n.unique_bytes_tx > 0) {
      ++nodes_with_traffic;
      der_sum += n.der();
      epb.push_back(*n.energy_per_byte());
      active_epb.push_back(*n.active_energy_per_byte());
    }
  }
  lorasim::der(unique_bytes_rx, unique_bytes_tx);
  der = nodes_with_traffic > 0 ? der_sum / static_cast<double>(nodes_with_traffic) : 1.0;
  collision_ratio =
      frames_tx > 0 ? static_cast<double>(frames_collided) / static_cast<double>(frames_tx) : 0.0;
  const Stat e = summarize(epb);
  const Stat a = summarize(active_epb);
  energy_per_byte_mean = e.mean;
  energy_per_byte_std = e.stddev;
  active_energy_per_byte_mean = a.mean;
  active_energy_per_byte_std = a.stddev;
}

Stat summarize(std::span<const double> values) {
  Stat s;
  s.n = values.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(s.n - 1));
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  auto pct = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  s.p05 = pct(0.05);
  s.p50 = pct(0.50);
  s.p95 = pct(0.95);
  return s;
}

}  // namespace lorasim
