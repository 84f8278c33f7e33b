// lorasim: run, sweep or check LoRaWAN network experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "lorasim/config.hpp"
#include "lorasim/engine.hpp"
#include "lorasim/report.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kInvariantBreach = 2 };

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<std::string> out;
  int threads = 1;
};

lorasim::ExperimentSpec resolve(const Overrides& o) {
  lorasim::ExperimentSpec spec = o.config_path.empty()
                                     ? lorasim::parse_config(nlohmann::json::object())
                                     : lorasim::load_config(o.config_path);
  if (o.seed) spec.base.seed = *o.seed;
  if (o.replications) spec.base.replications = *o.replications;
  if (o.out) spec.output.dir = *o.out;
  if (o.threads < 1) throw lorasim::ConfigError("--threads: must be at least 1");
  // Re-parse so overridden values go through the same checks as file values.
  return lorasim::parse_config(lorasim::to_json(spec));
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

int execute(const lorasim::ExperimentSpec& spec, bool whole_grid, int threads) {
  std::vector<lorasim::SweepCell> cells;
  if (whole_grid) {
    cells = lorasim::expand(spec);
  } else {
    lorasim::SweepCell one;
    one.payload_len = spec.base.payload_len;
    one.sigma = spec.base.propagation.sigma;
    one.mode = {spec.base.adr_enabled, spec.base.confirmed};
    one.config = spec.base;
    cells.push_back(one);
  }

  std::vector<lorasim::CellResult> results;
  for (const lorasim::SweepCell& cell : cells) {
    std::fprintf(stderr, "cell %zu/%zu: payload %d B, sigma %g dB, adr %d, confirmed %d\n",
                 cell.index + 1, cells.size(), cell.payload_len, cell.sigma, cell.mode.adr,
                 cell.mode.confirmed);
    results.push_back({cell, lorasim::monte_carlo(cell.config, threads)});
    const auto& r = results.back().result;
    std::printf("%zu,%d,%s,%d,%d der=%s epb=%s active_epb=%s\n", cell.index, cell.payload_len,
                lorasim::format_g9(cell.sigma).c_str(), cell.mode.adr, cell.mode.confirmed,
                lorasim::format_g9(r.der.mean).c_str(),
                lorasim::format_g9(r.energy_per_byte.mean).c_str(),
                lorasim::format_g9(r.active_energy_per_byte.mean).c_str());
  }

  const std::filesystem::path dir = spec.output.dir;
  std::filesystem::create_directories(dir);
  write_file(dir / "effective_config.json", lorasim::to_json(spec).dump(2) + "\n");
  if (spec.output.csv) {
    std::ofstream csv(dir / "results.csv", std::ios::binary);
    lorasim::write_csv(csv, results);
    if (!csv) throw std::runtime_error("cannot write results.csv");
  }
  if (spec.output.json) {
    write_file(dir / "summary.json", lorasim::summary_document(results).dump(2) + "\n");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LoRaWAN network simulator"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", o.config_path, "JSON experiment file (defaults when omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--replications", o.replications, "replications per cell");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--threads", o.threads, "worker threads")->capture_default_str();
  };
  CLI::App* run = app.add_subcommand("run", "simulate the base configuration");
  CLI::App* sweep = app.add_subcommand("sweep", "simulate every cell of the sweep grid");
  CLI::App* validate = app.add_subcommand("validate", "check a config and print it resolved");
  add_common(run);
  add_common(sweep);
  add_common(validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  lorasim::ExperimentSpec spec;
  try {
    spec = resolve(o);
  } catch (const lorasim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const lorasim::ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  if (validate->parsed()) {
    std::cout << lorasim::to_json(spec).dump(2) << '\n';
    return kOk;
  }
  try {
    return execute(spec, sweep->parsed(), o.threads);
  } catch (const lorasim::InvariantError& e) {
    std::cerr << "invariant breach: " << e.what() << '\n';
    return kInvariantBreach;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kInvariantBreach;
  }
}
