#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace lorasim {

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of replication `index` under `master`. For a fixed master seed this
/// is injective in `index` because it is a composition of bijections.
constexpr std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) + index);
}

enum class StreamPurpose : std::uint64_t {
  placement = 1,
  initial_params = 2,
  traffic = 3,
  shadowing = 4,
  timeouts = 5,
};

/// Seeded stream with the handful of draws the simulator needs. The
/// transforms are written out so sequences do not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for (run seed, subject, purpose). Subject -1 is the
  /// run-wide stream.
  static Rng stream(std::uint64_t run_seed, std::int64_t subject, StreamPurpose purpose) {
    std::uint64_t s = splitmix64(run_seed ^ 0x5a17c0de5eedULL);
    s = splitmix64(s + static_cast<std::uint64_t>(subject + 1));
    s = splitmix64(s + static_cast<std::uint64_t>(purpose));
    return Rng(s);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(engine_() % span);
  }
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }
  /// Standard normal via Box-Muller; one draw per call.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lorasim
