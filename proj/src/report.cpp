#include "lorasim/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace lorasim {

using nlohmann::json;

std::string format_g9(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

double round_g9(double value) {
  if (!std::isfinite(value)) return value;
  return std::strtod(format_g9(value).c_str(), nullptr);
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns = [] {
    std::vector<std::string> c{"cell",
                               "payload_len",
                               "sigma_db",
                               "adr",
                               "confirmed",
                               "replication",
                               "seed",
                               "der",
                               "energy_per_byte_mean",
                               "energy_per_byte_std",
                               "active_energy_per_byte_mean",
                               "active_energy_per_byte_std",
                               "collision_ratio",
                               "acks_dropped",
                               "retransmissions",
                               "frames_tx",
                               "frames_unacked",
                               "unique_bytes_tx",
                               "unique_bytes_rx"};
    for (EnergyState s : kAllEnergyStates) c.push_back("energy_" + std::string(to_string(s)) + "_mj");
    return c;
  }();
  return columns;
}

void write_csv(std::ostream& out, std::span<const CellResult> cells) {
  const auto& cols = csv_columns();
  out << "# " << kCsvSchema << "; energy in mJ summed over nodes, energy per byte in mJ/B\n";
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const CellResult& c : cells) {
    for (std::size_t r = 0; r < c.result.runs.size(); ++r) {
      const RunMetrics& m = c.result.runs[r];
      out << c.cell.index << ',' << c.cell.payload_len << ',' << format_g9(c.cell.sigma) << ','
          << int(c.cell.mode.adr) << ',' << int(c.cell.mode.confirmed) << ',' << r << ','
          << m.seed << ',' << format_g9(m.der) << ',' << format_g9(m.energy_per_byte_mean) << ','
          << format_g9(m.energy_per_byte_std) << ',' << format_g9(m.active_energy_per_byte_mean)
          << ',' << format_g9(m.active_energy_per_byte_std) << ','
          << format_g9(m.collision_ratio) << ',' << m.acks_dropped << ',' << m.retransmissions
          << ',' << m.frames_tx << ',' << m.frames_unacked << ',' << m.unique_bytes_tx << ','
          << m.unique_bytes_rx;
      for (EnergyState s : kAllEnergyStates) out << ',' << format_g9(m.energy.energy(s));
      out << '\n';
    }
  }
}

namespace {

json stat_json(const Stat& s) {
  return {{"n", s.n},
          {"mean", round_g9(s.mean)},
          {"std", round_g9(s.stddev)},
          {"p05", round_g9(s.p05)},
          {"p50", round_g9(s.p50)},
          {"p95", round_g9(s.p95)}};
}

}  // namespace

json cell_summary(const CellResult& c) {
  const MonteCarloResult& r = c.result;
  json by_state = json::object();
  double node_count = 0.0;
  for (const RunMetrics& m : r.runs) node_count += static_cast<double>(m.nodes.size());
  for (EnergyState s : kAllEnergyStates) {
    double total = 0.0;
    for (const RunMetrics& m : r.runs) total += m.energy.energy(s);
    by_state[std::string(to_string(s))] = round_g9(node_count > 0 ? total / node_count : 0.0);
  }
  return {{"cell", c.cell.index},
          {"payload_len", c.cell.payload_len},
          {"sigma_db", round_g9(c.cell.sigma)},
          {"adr", c.cell.mode.adr},
          {"confirmed", c.cell.mode.confirmed},
          {"replications", r.runs.size()},
          {"der", stat_json(r.der)},
          {"energy_per_byte", stat_json(r.energy_per_byte)},
          {"active_energy_per_byte", stat_json(r.active_energy_per_byte)},
          {"collision_ratio", stat_json(r.collision_ratio)},
          {"acks_dropped", stat_json(r.acks_dropped)},
          {"retransmissions", stat_json(r.retransmissions)},
          {"node_energy_by_state_mj", by_state}};
}

json summary_document(std::span<const CellResult> cells) {
  json list = json::array();
  for (const CellResult& c : cells) list.push_back(cell_summary(c));
  return {{"schema", kSummarySchema}, {"cells", list}};
}

}  // namespace lorasim
