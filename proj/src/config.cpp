#include "lorasim/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace lorasim {

using nlohmann::json;

namespace {

/// Walks one JSON object, remembering which keys were consumed so leftovers
/// can be reported as typos.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "config root" : path_, "must be an object");
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
  }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  std::string where(const char* key) const { return path_ + key; }

  void get(const char* key, int& out) {
    if (const json* j = find(key)) out = as_int(*j, where(key));
  }
  void get(const char* key, std::uint64_t& out) {
    if (const json* j = find(key)) {
      if (!j->is_number_unsigned() && !(j->is_number_integer() && j->get<std::int64_t>() >= 0)) {
        fail(where(key), "must be a non-negative integer");
      }
      out = j->get<std::uint64_t>();
    }
  }
  void get(const char* key, double& out) {
    if (const json* j = find(key)) out = as_double(*j, where(key));
  }
  void get(const char* key, bool& out) {
    if (const json* j = find(key)) {
      if (!j->is_boolean()) fail(where(key), "must be true or false");
      out = j->get<bool>();
    }
  }
  void get(const char* key, std::string& out) {
    if (const json* j = find(key)) {
      if (!j->is_string()) fail(where(key), "must be a string");
      out = j->get<std::string>();
    }
  }
  void get(const char* key, std::optional<int>& out) {
    if (const json* j = find(key)) {
      out = j->is_null() ? std::nullopt : std::optional<int>(as_int(*j, where(key)));
    }
  }
  void get(const char* key, std::vector<double>& out) {
    if (const json* j = find(key)) {
      out.clear();
      for (const json& e : as_array(*j, where(key))) out.push_back(as_double(e, where(key)));
    }
  }
  void get(const char* key, std::vector<int>& out) {
    if (const json* j = find(key)) {
      out.clear();
      for (const json& e : as_array(*j, where(key))) out.push_back(as_int(e, where(key)));
    }
  }
  template <std::size_t N>
  void get(const char* key, std::array<double, N>& out) {
    if (const json* j = find(key)) {
      const json& a = as_array(*j, where(key));
      if (a.size() != N) fail(where(key), "must list " + std::to_string(N) + " values");
      for (std::size_t i = 0; i < N; ++i) out[i] = as_double(a[i], where(key));
    }
  }

  template <class F>
  void object(const char* key, F&& body) {
    if (const json* j = find(key)) {
      Reader r(*j, where(key) + ".");
      body(r);
      r.finish();
    }
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) fail(path_ + key, "unknown key");
    }
  }

  static int as_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "must be an integer");
    const auto v = j.get<std::int64_t>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      fail(where, "is out of range");
    }
    return static_cast<int>(v);
  }
  static double as_double(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "must be a number");
    return j.get<double>();
  }
  static const json& as_array(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "must be a list");
    return j;
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_propagation(Reader& r, PropagationConfig& p) {
  r.get("d0_m", p.d0);
  r.get("pl_d0_db", p.pl_d0);
  r.get("path_loss_exponent", p.n);
  r.get("sigma_db", p.sigma);
  r.get("indoor_penetration_db", p.indoor_penetration_db);
}

void read_phy(Reader& r, PhyTables& t) {
  r.get("sensitivity_dbm", t.sensitivity_dbm);
  r.get("snr_floor_db", t.snr_floor_db);
  r.get("noise_figure_db", t.noise_figure_db);
}

void read_energy(Reader& r, EnergyProfile& e) {
  r.get("sleep_mw", e.sleep_mw);
  r.get("processing_mw", e.processing_mw);
  r.get("processing_s", e.processing_s);
  r.get("tx_prep_mw", e.tx_prep_mw);
  r.get("tx_prep_s", e.tx_prep_s);
  r.get("wait_rx1_mw", e.wait_rx1_mw);
  r.get("wait_rx1_s", e.wait_rx1_s);
  r.get("rx_prep_mw", e.rx_prep_mw);
  r.get("rx_prep_s", e.rx_prep_s);
  r.get("rx1_mw", e.rx1_mw);
  r.get("wait_rx2_mw", e.wait_rx2_mw);
  r.get("rx_delay2_s", e.rx_delay2_s);
  r.get("rx2_mw", e.rx2_mw);
  r.get("rx_post_mw", e.rx_post_mw);
  r.get("rx_post_s", e.rx_post_s);
  if (const json* j = r.find("tx_power_mw")) {
    if (!j->is_object()) Reader::fail(r.where("tx_power_mw"), "must map dBm to mW");
    std::map<int, double> table;
    for (const auto& [key, value] : j->items()) {
      const std::string where = r.where("tx_power_mw") + "." + key;
      int dbm = 0;
      std::istringstream in(key);
      if (!(in >> dbm) || !in.eof()) Reader::fail(where, "key must be an integer dBm value");
      table[dbm] = Reader::as_double(value, where);
    }
    if (table.empty()) Reader::fail(r.where("tx_power_mw"), "must not be empty");
    try {
      e.tx_power = TxPowerTable(std::move(table));
    } catch (const ParameterError& err) {
      Reader::fail(r.where("tx_power_mw"), err.what());
    }
  }
}

void read_mac(Reader& r, MacSettings& m) {
  r.get("max_transmissions", m.max_retries);
  r.get("ack_timeout_min_s", m.ack_timeout_min_s);
  r.get("ack_timeout_max_s", m.ack_timeout_max_s);
  r.get("adr_ack_limit", m.adr_ack_limit);
  r.get("adr_ack_delay", m.adr_ack_delay);
  r.get("rx1_delay_s", m.rx1_delay_s);
  r.get("rx2_delay_s", m.rx2_delay_s);
  r.get("rx2_freq_hz", m.rx2_freq);
  r.get("rx2_dr", m.rx2_dr.index);
  r.get("mac_command_bytes", m.mac_command_bytes);
  r.get("rx_timeout_min_symbols", m.rx_timeout.min_symbols);
  r.get("rx_max_error_s", m.rx_timeout.max_rx_error_s);
}

void read_adr(Reader& r, AdrSettings& a) {
  r.get("history_len", a.history_len);
  r.get("device_margin_db", a.device_margin_db);
  r.get("step_db", a.step_db);
}

void read_locations(Reader& r, std::vector<Location>& out) {
  const json* j = r.find("fixed_locations");
  if (j == nullptr) return;
  const std::string where = r.where("fixed_locations");
  out.clear();
  for (const json& e : Reader::as_array(*j, where)) {
    if (!e.is_array() || e.size() != 2) Reader::fail(where, "entries must be [x, y] pairs");
    out.push_back({Reader::as_double(e[0], where), Reader::as_double(e[1], where)});
  }
}

void read_sweep(Reader& r, SweepAxes& s, const TrafficMode& base) {
  r.get("payload_len", s.payload_len);
  r.get("sigma", s.sigma);
  const json* modes = r.find("modes");
  const json* adr = r.find("adr");
  const json* conf = r.find("confirmed");
  if (modes && (adr || conf)) {
    Reader::fail(r.where("modes"), "give either modes or adr/confirmed lists, not both");
  }
  if (modes) {
    s.modes.clear();
    for (const json& m : Reader::as_array(*modes, r.where("modes"))) {
      Reader mr(m, r.where("modes") + "[].");
      TrafficMode t;
      mr.get("adr", t.adr);
      mr.get("confirmed", t.confirmed);
      mr.finish();
      s.modes.push_back(t);
    }
  } else if (adr || conf) {
    auto flags = [&](const json* j, const char* key) {
      std::vector<bool> out;
      if (j == nullptr) return out;
      for (const json& e : Reader::as_array(*j, r.where(key))) {
        if (!e.is_boolean()) Reader::fail(r.where(key), "entries must be true or false");
        out.push_back(e.get<bool>());
      }
      return out;
    };
    const std::vector<bool> a = flags(adr, "adr");
    const std::vector<bool> c = flags(conf, "confirmed");
    if ((adr && a.empty()) || (conf && c.empty())) {
      Reader::fail(r.where(adr && a.empty() ? "adr" : "confirmed"), "must not be empty");
    }
    // A lone list pairs with the base value of the other flag.
    s.modes.clear();
    for (bool av : a.empty() ? std::vector<bool>{base.adr} : a) {
      for (bool cv : c.empty() ? std::vector<bool>{base.confirmed} : c) {
        s.modes.push_back({av, cv});
      }
    }
  }
  auto no_duplicates = [&](auto values, const char* key) {
    std::sort(values.begin(), values.end());
    if (std::adjacent_find(values.begin(), values.end()) != values.end()) {
      Reader::fail(r.where(key), "contains duplicates");
    }
  };
  no_duplicates(s.payload_len, "payload_len");
  no_duplicates(s.sigma, "sigma");
  for (std::size_t i = 0; i < s.modes.size(); ++i) {
    for (std::size_t j = i + 1; j < s.modes.size(); ++j) {
      if (s.modes[i] == s.modes[j]) Reader::fail(r.where("modes"), "contains duplicates");
    }
  }
}

}  // namespace

ExperimentSpec parse_config(const json& doc) {
  ExperimentSpec spec;
  SimulationConfig& c = spec.base;
  {
    Reader r(doc, "");
    r.get("num_nodes", c.num_nodes);
    r.get("cell_radius_m", c.cell_radius_m);
    r.get("horizon_days", c.horizon_days);
    r.get("lambda_bps", c.lambda_bps);
    r.get("payload_len", c.payload_len);
    r.get("channels_hz", c.channels);
    r.get("node_duty_cycle", c.node_duty_cycle);
    r.get("gateway_rx1_duty_cycle", c.gateway_rx1_duty_cycle);
    r.get("gateway_rx2_duty_cycle", c.gateway_rx2_duty_cycle);
    r.get("initial_tx_power_dbm", c.initial_tx_power_dbm);
    r.get("initial_sf", c.initial_sf);
    r.get("adr_enabled", c.adr_enabled);
    r.get("confirmed", c.confirmed);
    r.get("seed", c.seed);
    r.get("replications", c.replications);
    r.get("redraw_placement", c.redraw_placement);
    read_locations(r, c.fixed_locations);
    r.get("measurement_interval_s", c.measurement_interval_s);
    r.object("propagation", [&](Reader& s) { read_propagation(s, c.propagation); });
    r.object("phy", [&](Reader& s) { read_phy(s, c.phy); });
    r.object("energy", [&](Reader& s) { read_energy(s, c.energy); });
    r.object("mac", [&](Reader& s) { read_mac(s, c.mac); });
    r.object("adr", [&](Reader& s) { read_adr(s, c.adr); });
    r.object("sweep", [&](Reader& s) {
      read_sweep(s, spec.sweep, TrafficMode{c.adr_enabled, c.confirmed});
    });
    r.object("output", [&](Reader& s) {
      s.get("dir", spec.output.dir);
      s.get("csv", spec.output.csv);
      s.get("json", spec.output.json);
    });
    r.finish();
  }
  if (c.num_nodes < 1) throw ConfigError("num_nodes: must be at least 1");
  if (spec.output.dir.empty()) throw ConfigError("output.dir: must not be empty");
  c.validate();
  for (const SweepCell& cell : expand(spec)) cell.config.validate();
  return spec;
}

ExperimentSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    return parse_config(json::object());
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentSpec& spec) {
  const SimulationConfig& c = spec.base;
  json j;
  j["num_nodes"] = c.num_nodes;
  j["cell_radius_m"] = c.cell_radius_m;
  j["horizon_days"] = c.horizon_days;
  j["lambda_bps"] = c.lambda_bps;
  j["payload_len"] = c.payload_len;
  j["channels_hz"] = c.channels;
  j["node_duty_cycle"] = c.node_duty_cycle;
  j["gateway_rx1_duty_cycle"] = c.gateway_rx1_duty_cycle;
  j["gateway_rx2_duty_cycle"] = c.gateway_rx2_duty_cycle;
  j["initial_tx_power_dbm"] = c.initial_tx_power_dbm;
  j["initial_sf"] = c.initial_sf ? json(*c.initial_sf) : json(nullptr);
  j["adr_enabled"] = c.adr_enabled;
  j["confirmed"] = c.confirmed;
  j["seed"] = c.seed;
  j["replications"] = c.replications;
  j["redraw_placement"] = c.redraw_placement;
  json locs = json::array();
  for (const Location& l : c.fixed_locations) locs.push_back({l.x, l.y});
  j["fixed_locations"] = locs;
  j["measurement_interval_s"] = c.measurement_interval_s;

  j["propagation"] = {{"d0_m", c.propagation.d0},
                      {"pl_d0_db", c.propagation.pl_d0},
                      {"path_loss_exponent", c.propagation.n},
                      {"sigma_db", c.propagation.sigma},
                      {"indoor_penetration_db", c.propagation.indoor_penetration_db}};
  j["phy"] = {{"sensitivity_dbm", c.phy.sensitivity_dbm},
              {"snr_floor_db", c.phy.snr_floor_db},
              {"noise_figure_db", c.phy.noise_figure_db}};
  const EnergyProfile& e = c.energy;
  json power = json::object();
  for (const auto& [dbm, mw] : e.tx_power.entries()) power[std::to_string(dbm)] = mw;
  j["energy"] = {{"sleep_mw", e.sleep_mw},         {"processing_mw", e.processing_mw},
                 {"processing_s", e.processing_s}, {"tx_prep_mw", e.tx_prep_mw},
                 {"tx_prep_s", e.tx_prep_s},       {"wait_rx1_mw", e.wait_rx1_mw},
                 {"wait_rx1_s", e.wait_rx1_s},     {"rx_prep_mw", e.rx_prep_mw},
                 {"rx_prep_s", e.rx_prep_s},       {"rx1_mw", e.rx1_mw},
                 {"wait_rx2_mw", e.wait_rx2_mw},   {"rx_delay2_s", e.rx_delay2_s},
                 {"rx2_mw", e.rx2_mw},             {"rx_post_mw", e.rx_post_mw},
                 {"rx_post_s", e.rx_post_s},       {"tx_power_mw", power}};
  const MacSettings& m = c.mac;
  j["mac"] = {{"max_transmissions", m.max_retries},
              {"ack_timeout_min_s", m.ack_timeout_min_s},
              {"ack_timeout_max_s", m.ack_timeout_max_s},
              {"adr_ack_limit", m.adr_ack_limit},
              {"adr_ack_delay", m.adr_ack_delay},
              {"rx1_delay_s", m.rx1_delay_s},
              {"rx2_delay_s", m.rx2_delay_s},
              {"rx2_freq_hz", m.rx2_freq},
              {"rx2_dr", m.rx2_dr.index},
              {"mac_command_bytes", m.mac_command_bytes},
              {"rx_timeout_min_symbols", m.rx_timeout.min_symbols},
              {"rx_max_error_s", m.rx_timeout.max_rx_error_s}};
  j["adr"] = {{"history_len", c.adr.history_len},
              {"device_margin_db", c.adr.device_margin_db},
              {"step_db", c.adr.step_db}};
  json modes = json::array();
  for (const TrafficMode& t : spec.sweep.modes) {
    modes.push_back({{"adr", t.adr}, {"confirmed", t.confirmed}});
  }
  j["sweep"] = {{"payload_len", spec.sweep.payload_len},
                {"sigma", spec.sweep.sigma},
                {"modes", modes}};
  j["output"] = {{"dir", spec.output.dir}, {"csv", spec.output.csv}, {"json", spec.output.json}};
  return j;
}

std::vector<SweepCell> expand(const ExperimentSpec& spec) {
  const SimulationConfig& b = spec.base;
  const std::vector<int> payloads =
      spec.sweep.payload_len.empty() ? std::vector<int>{b.payload_len} : spec.sweep.payload_len;
  const std::vector<double> sigmas =
      spec.sweep.sigma.empty() ? std::vector<double>{b.propagation.sigma} : spec.sweep.sigma;
  const std::vector<TrafficMode> modes = spec.sweep.modes.empty()
                                             ? std::vector<TrafficMode>{{b.adr_enabled, b.confirmed}}
                                             : spec.sweep.modes;
  std::vector<SweepCell> cells;
  for (int p : payloads) {
    for (double s : sigmas) {
      for (const TrafficMode& m : modes) {
        SweepCell cell;
        cell.index = cells.size();
        cell.payload_len = p;
        cell.sigma = s;
        cell.mode = m;
        cell.config = b;
        cell.config.payload_len = p;
        cell.config.propagation.sigma = s;
        cell.config.adr_enabled = m.adr;
        cell.config.confirmed = m.confirmed;
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

}  // namespace lorasim
