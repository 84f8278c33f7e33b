#include <doctest.h>

#include "lorasim/phy.hpp"
#include "oracles.hpp"

using namespace lorasim;

namespace {

double oracle_airtime(const LoRaParams& p, int phy_payload) {
  return oracle::airtime_s(p.sf, p.bw, p.cr, p.preamble_len, p.explicit_header, p.crc_on,
                           p.low_dr_opt, phy_payload);
}

}  // namespace

TEST_CASE("symbol time follows 2^sf / bw") {
  CHECK(symbol_time(7, 125000) == doctest::Approx(1.024e-3).epsilon(1e-12));
  CHECK(symbol_time(9, 125000) == doctest::Approx(4.096e-3).epsilon(1e-12));
  CHECK(symbol_time(12, 125000) == doctest::Approx(32.768e-3).epsilon(1e-12));
  CHECK_THROWS_AS(symbol_time(6, 125000), ParameterError);
  CHECK_THROWS_AS(symbol_time(13, 125000), ParameterError);
  CHECK_THROWS_AS(symbol_time(7, 0.0), ParameterError);
}

TEST_CASE("doubling bandwidth halves the symbol") {
  for (int sf = kMinSf; sf <= kMaxSf; ++sf) {
    CHECK(symbol_time(sf, 250000) == symbol_time(sf, 125000) / 2.0);
  }
}

TEST_CASE("airtime matches the symbol-count oracle") {
  SUBCASE("51 B at SF12 with low data rate optimization") {
    LoRaParams p = uplink_params(12, 14);
    const double expected = oracle_airtime(p, 64);
    CHECK(expected == doctest::Approx(2.793472).epsilon(1e-9));
    CHECK(frame_airtime(p, 51) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(airtime(p, 64) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("header-only SF7 frame") {
    LoRaParams p = uplink_params(7, 14);
    const double a = airtime(p, 0);
    CHECK(a == doctest::Approx(oracle_airtime(p, 0)).epsilon(1e-12));
    CHECK(a > 0.0);
    CHECK(a < 0.030);
  }
  SUBCASE("sweep over the parameter space") {
    for (int sf = kMinSf; sf <= kMaxSf; ++sf) {
      for (int cr = 1; cr <= 4; ++cr) {
        for (bool crc : {false, true}) {
          for (bool eh : {false, true}) {
            for (int pl : {0, 1, 5, 13, 18, 51, 64, 128, 255}) {
              LoRaParams p = uplink_params(sf, 14);
              p.cr = cr;
              p.crc_on = crc;
              p.explicit_header = eh;
              CHECK(airtime(p, pl) == doctest::Approx(oracle_airtime(p, pl)).epsilon(1e-12));
            }
          }
        }
      }
    }
  }
}

TEST_CASE("airtime is monotone in payload, sf, cr and preamble") {
  for (int sf = kMinSf; sf <= kMaxSf; ++sf) {
    LoRaParams p = uplink_params(sf, 14);
    for (int pl = 1; pl <= 255; ++pl) {
      CHECK(airtime(p, pl) >= airtime(p, pl - 1));
    }
    if (sf < kMaxSf) {
      const LoRaParams next = uplink_params(sf + 1, 14);
      for (int pl : {0, 10, 51, 200}) CHECK(airtime(next, pl) >= airtime(p, pl));
    }
    for (int cr = 1; cr < 4; ++cr) {
      LoRaParams a = p;
      LoRaParams b = p;
      a.cr = cr;
      b.cr = cr + 1;
      CHECK(airtime(b, 20) >= airtime(a, 20));
    }
    LoRaParams longer = p;
    longer.preamble_len = 12;
    CHECK(airtime(longer, 20) > airtime(p, 20));
  }
}

TEST_CASE("airtime rejects out-of-range payloads and params") {
  const LoRaParams p = uplink_params(7, 14);
  CHECK_THROWS_AS(airtime(p, 256), ParameterError);
  CHECK_THROWS_AS(airtime(p, -1), ParameterError);
  LoRaParams bad = p;
  bad.tx_power_dbm = 13;
  CHECK_THROWS_AS(airtime(bad, 10), ParameterError);
  LoRaParams no_ldro = uplink_params(12, 14);
  no_ldro.low_dr_opt = false;
  CHECK_THROWS_AS(validate(no_ldro), ParameterError);
}

TEST_CASE("higher data rate is strictly faster") {
  for (int dr = 0; dr < 5; ++dr) {
    const LoRaParams slow = uplink_params(sf_of_dr(DataRate{dr}), 14);
    const LoRaParams fast = uplink_params(sf_of_dr(DataRate{dr + 1}), 14);
    CHECK(airtime(fast, 20) < airtime(slow, 20));
  }
}

TEST_CASE("time off") {
  const double a = oracle::airtime_s(12, 125000, 1, 8, true, true, true, 64);
  CHECK(time_off(a, 0.01) == doctest::Approx(276.553728).epsilon(1e-9));
  CHECK(time_off(1.0, 0.10) == doctest::Approx(9.0));
  CHECK(time_off(3.3, 1.0) == 0.0);
  for (double air : {0.05, 0.4, 2.7}) {
    for (double dc : {0.001, 0.01, 0.1, 0.5}) {
      CHECK(time_off(air, dc) + air == doctest::Approx(air / dc).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(time_off(1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(time_off(1.0, 1.5), ParameterError);
}

TEST_CASE("data rate mapping round-trips") {
  for (int i = 0; i <= 5; ++i) CHECK(dr_of_sf(sf_of_dr(DataRate{i})).index == i);
  CHECK(sf_of_dr(DataRate{0}) == 12);
  CHECK(sf_of_dr(DataRate{3}) == 9);
  CHECK(sf_of_dr(DataRate{5}) == 7);
  CHECK_THROWS_AS(sf_of_dr(DataRate{6}), ParameterError);
}

TEST_CASE("band bookkeeping") {
  Band b{"ch", 0.01, {868.1e6}};
  CHECK(b.permits(0.0));
  b.record(10.0, 1.0);
  CHECK(b.last_tx_end == 11.0);
  CHECK(b.next_allowed_tx == doctest::Approx(110.0));
  CHECK(b.next_allowed_tx >= b.last_tx_end);
  CHECK_FALSE(b.permits(109.9));
  CHECK(b.permits(110.0));
  CHECK(b.contains(868.1e6));
  CHECK_FALSE(b.contains(868.3e6));
}

TEST_CASE("receiver tables") {
  CHECK(sensitivity(12, 125000) == -139.5);
  CHECK(sensitivity(7, 125000) == -126.5);
  CHECK(snr_demod_floor(7) == -7.5);
  CHECK(snr_demod_floor(12) == -20.0);
  CHECK(snr_demod_floor(9) - snr_demod_floor(8) == -2.5);
  for (int sf = kMinSf; sf < kMaxSf; ++sf) {
    CHECK(sensitivity(sf + 1, 125000) < sensitivity(sf, 125000));
    CHECK(snr_demod_floor(sf + 1) < snr_demod_floor(sf));
  }
  CHECK_THROWS_AS(sensitivity(7, 250000), ParameterError);
  CHECK_THROWS_AS(snr_demod_floor(5), ParameterError);

  PhyTables broken;
  broken.sensitivity_dbm[3] = broken.sensitivity_dbm[2];
  CHECK_THROWS_AS(broken.validate(), ParameterError);
}

TEST_CASE("receive window timeout in symbols") {
  // Both window edges may drift by the maximum timing error; the window
  // must still cover min_symbols of preamble.
  const RxTimeout t;
  const int expected[] = {24, 14, 9, 7, 6, 6};
  for (int sf = kMinSf; sf <= kMaxSf; ++sf) {
    const double tsym = std::ldexp(1.0, sf) / 125000.0;
    const int oracle = std::max(6, static_cast<int>(std::ceil((4 * tsym + 0.020) / tsym)));
    CHECK(t.symbols(sf, 125000) == oracle);
    CHECK(t.symbols(sf, 125000) == expected[sf - kMinSf]);
  }
}
