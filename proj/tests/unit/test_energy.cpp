#include <doctest.h>

#include <numeric>

#include "lorasim/energy.hpp"
#include "lorasim/mac.hpp"
#include "oracles.hpp"

using namespace lorasim;

TEST_CASE("fixed-duration states match the power table") {
  const EnergyProfile p;
  CHECK(p.processing_mw * p.processing_s == doctest::Approx(0.075));
  CHECK(p.tx_prep_mw * p.tx_prep_s == doctest::Approx(0.5));
  CHECK(p.rx_prep_mw * p.rx_prep_s == doctest::Approx(0.02805));
  CHECK(p.rx_post_mw * p.rx_post_s == doctest::Approx(0.08881));
  CHECK(p.wait_rx1_mw * p.wait_rx1_s == doctest::Approx(5.7e-3));
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("transmit power table") {
  const TxPowerTable t;
  CHECK(t.consumption_mw(2) == 91.8);
  CHECK(t.consumption_mw(14) == 146.5);
  CHECK(t.min_dbm() == 2);
  CHECK(t.max_dbm() == 14);
  CHECK(t.step_down(14) == 11);
  CHECK(t.step_down(2) == 2);
  CHECK_THROWS_AS(t.consumption_mw(13), ParameterError);
  CHECK_THROWS_AS(t.consumption_mw(20), ParameterError);
  int prev = 0;
  double prev_mw = 0.0;
  for (const auto& [dbm, mw] : t.entries()) {
    CHECK(dbm > prev);
    CHECK(mw > prev_mw);
    prev = dbm;
    prev_mw = mw;
  }
  CHECK_THROWS_AS(TxPowerTable({{2, 100.0}, {5, 90.0}}), ParameterError);
  CHECK_THROWS_AS(TxPowerTable(std::map<int, double>{}), ParameterError);
}

TEST_CASE("profile validation") {
  EnergyProfile p;
  p.sleep_mw = 20.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = EnergyProfile{};
  p.tx_prep_s = 0.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = EnergyProfile{};
  p.rx1_mw = -1.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
}

TEST_CASE("ledger conserves energy and time") {
  EnergyLedger l;
  l.debit(EnergyState::tx, 146.5, 0.5);
  l.debit(EnergyState::processing, 15.0, 0.005);
  l.debit(EnergyState::tx, 91.8, 0.25);
  CHECK(l.energy(EnergyState::tx) == doctest::Approx(146.5 * 0.5 + 91.8 * 0.25));
  CHECK(l.residency(EnergyState::tx) == doctest::Approx(0.75));
  CHECK(l.active_residency() == doctest::Approx(0.755));
  l.close(100.0, 5.7e-3);
  CHECK(l.residency(EnergyState::sleep) == doctest::Approx(100.0 - 0.755));
  const double total_time =
      std::accumulate(l.residency_s.begin(), l.residency_s.end(), 0.0);
  CHECK(total_time == doctest::Approx(100.0));
  CHECK(l.total_energy() == doctest::Approx(l.active_energy() + 5.7e-3 * (100.0 - 0.755)));
}

TEST_CASE("doubling sleep power doubles the sleep bill") {
  EnergyLedger a;
  EnergyLedger b;
  a.debit(EnergyState::tx, 146.5, 0.1);
  b.debit(EnergyState::tx, 146.5, 0.1);
  a.close(3600.0, 5.7e-3);
  b.close(3600.0, 11.4e-3);
  CHECK(b.energy(EnergyState::sleep) == doctest::Approx(2.0 * a.energy(EnergyState::sleep)));
}

TEST_CASE("receive sequence shapes") {
  const EnergyProfile p;
  const MacSettings mac;
  const LoRaParams up = uplink_params(9, 14);

  SUBCASE("downlink in RX1 skips RX2") {
    const auto spans = receive_sequence(p, mac, up, RxSlot::rx1, 0.1);
    for (const auto& s : spans) {
      CHECK(s.state != EnergyState::rx2);
      CHECK(s.state != EnergyState::wait_rx2);
    }
    CHECK(spans.back().state == EnergyState::rx_post);
  }
  SUBCASE("no downlink opens both windows at timeout length, no post-processing") {
    const auto spans = receive_sequence(p, mac, up, std::nullopt, 0.0);
    double rx1 = 0.0;
    double rx2 = 0.0;
    for (const auto& s : spans) {
      CHECK(s.state != EnergyState::rx_post);
      if (s.state == EnergyState::rx1) rx1 = s.duration_s;
      if (s.state == EnergyState::rx2) rx2 = s.duration_s;
    }
    CHECK(rx1 == doctest::Approx(mac.rx_timeout.duration(9, 125000)));
    CHECK(rx2 == doctest::Approx(mac.rx_timeout.duration(9, 125000)));
  }
  SUBCASE("RX2 opens one second after RX1") {
    const auto spans = receive_sequence(p, mac, up, RxSlot::rx2, 0.2);
    double until_rx2 = 0.0;
    for (const auto& s : spans) {
      if (s.state == EnergyState::rx2) break;
      until_rx2 += s.duration_s;
    }
    // wait_rx1 + prep + rx1 + wait_rx2 + prep = 2 s + two prep ramps
    CHECK(until_rx2 == doctest::Approx(p.wait_rx1_s + p.rx_delay2_s + 2 * p.rx_prep_s));
  }
}

TEST_CASE("RX2 at SF9 saves energy over RX1 at SF12 for an ACK") {
  const EnergyProfile p;
  const MacSettings mac;
  const LoRaParams up = uplink_params(12, 14);
  const int ack_bytes = 13;
  const double ack12 = oracle::airtime_s(12, 125000, 1, 8, true, false, true, ack_bytes);
  const double ack9 = oracle::airtime_s(9, 125000, 1, 8, true, false, false, ack_bytes);
  const double tsym12 = 32.768e-3;
  const double timeout12 = 6 * tsym12;

  const double via_rx1 = p.wait_rx1_mw * 1.0 + p.rx_prep_mw * p.rx_prep_s + p.rx1_mw * ack12 +
                         p.rx_post_mw * p.rx_post_s;
  const double via_rx2 = p.wait_rx1_mw * 1.0 + p.rx_prep_mw * p.rx_prep_s +
                         p.rx1_mw * timeout12 + p.wait_rx2_mw * (1.0 - timeout12) +
                         p.rx_prep_mw * p.rx_prep_s + p.rx2_mw * ack9 +
                         p.rx_post_mw * p.rx_post_s;

  const double lib_rx1 = receive_energy(p, mac, up, RxSlot::rx1, ack12);
  const double lib_rx2 = receive_energy(p, mac, up, RxSlot::rx2, ack9);
  CHECK(lib_rx1 == doctest::Approx(via_rx1).epsilon(1e-12));
  CHECK(lib_rx2 == doctest::Approx(via_rx2).epsilon(1e-12));
  const double ratio = lib_rx1 / lib_rx2;
  CHECK(ratio >= 3.0);
  CHECK(ratio <= 6.0);
}
