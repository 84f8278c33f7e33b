#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lorasim/engine.hpp"

namespace lorasim {

/// One ADR/confirmed combination of a sweep.
struct TrafficMode {
  bool adr = true;
  bool confirmed = false;
  friend bool operator==(const TrafficMode&, const TrafficMode&) = default;
};

/// Sweep axes. An empty axis holds the base value fixed.
struct SweepAxes {
  std::vector<int> payload_len;
  std::vector<double> sigma;
  std::vector<TrafficMode> modes;
  friend bool operator==(const SweepAxes&, const SweepAxes&) = default;
};

struct OutputSettings {
  std::string dir = "out";
  bool csv = true;
  bool json = true;
  friend bool operator==(const OutputSettings&, const OutputSettings&) = default;
};

struct ExperimentSpec {
  SimulationConfig base;
  SweepAxes sweep;
  OutputSettings output;
  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

/// A point of the sweep grid with the config it resolves to.
struct SweepCell {
  std::size_t index = 0;
  int payload_len = 0;
  double sigma = 0.0;
  TrafficMode mode;
  SimulationConfig config;
};

/// Cartesian product payload x sigma x mode, payload varying slowest.
std::vector<SweepCell> expand(const ExperimentSpec& spec);

/// Strict parse: unknown keys and wrong types raise ConfigError naming the
/// key path. Omitted keys keep their defaults.
ExperimentSpec parse_config(const nlohmann::json& doc);
ExperimentSpec load_config(const std::filesystem::path& path);

/// Fully-resolved spec; parse_config(to_json(s)) == s.
nlohmann::json to_json(const ExperimentSpec& spec);

}  // namespace lorasim
