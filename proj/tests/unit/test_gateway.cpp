#include <doctest.h>

#include "lorasim/gateway.hpp"
#include "oracles.hpp"

using namespace lorasim;

namespace {

GatewayRecord make_gateway() {
  GatewayRecord gw;
  gw.bands = default_gateway_bands({868.1e6, 868.3e6, 868.5e6}, 0.01, 868.525e6, 0.10);
  return gw;
}

Packet uplink(int node, int sf, double snr, std::uint64_t seq, int dbm = 14, double start = 0.0) {
  Packet p;
  p.node_id = node;
  p.params = uplink_params(sf, dbm);
  p.payload_len = 9;
  p.freq = 868.1e6;
  p.start = start;
  p.airtime = frame_airtime(p.params, 9);
  p.snr_at_gw = snr;
  p.rss_at_gw = snr + noise_floor(125000.0);
  p.adr = true;
  p.frame_seq = seq;
  p.outcome = Outcome::received;
  return p;
}

void feed(GatewayRecord& gw, int node, int sf, double snr, int count, int dbm = 14) {
  for (int i = 0; i < count; ++i) {
    receive_uplink(gw, uplink(node, sf, snr, static_cast<std::uint64_t>(i), dbm));
  }
}

}  // namespace

TEST_CASE("reception bookkeeping") {
  GatewayRecord gw = make_gateway();
  Packet p = uplink(0, 9, 1.0, 0);
  CHECK(receive_uplink(gw, p).status == Reception::accepted);
  CHECK(gw.find(0)->snr_history.size() == 1);

  p.outcome = Outcome::collided;
  CHECK(receive_uplink(gw, p).status == Reception::collided);
  CHECK(gw.find(0)->snr_history.size() == 1);

  p.outcome = Outcome::pending;
  CHECK_THROWS_AS(receive_uplink(gw, p), InvariantError);

  for (int i = 0; i < 20; ++i) {
    receive_uplink(gw, uplink(0, 9, static_cast<double>(i + 10), static_cast<std::uint64_t>(i + 1)));
  }
  const auto& hist = gw.find(0)->snr_history;
  CHECK(hist.size() == 20);
  CHECK(hist.front() == 10.0);
}

TEST_CASE("duplicates are flagged as repeat copies") {
  GatewayRecord gw = make_gateway();
  CHECK(receive_uplink(gw, uplink(1, 9, 0.0, 5)).first_copy);
  CHECK_FALSE(receive_uplink(gw, uplink(1, 9, 0.0, 5)).first_copy);
  CHECK(receive_uplink(gw, uplink(1, 9, 0.0, 6)).first_copy);
}

TEST_CASE("ADR decision follows the margin arithmetic") {
  SUBCASE("needs a full history") {
    GatewayRecord gw = make_gateway();
    feed(gw, 0, 12, 2.08, 19);
    CHECK_FALSE(compute_adr(gw, 0).has_value());
  }
  SUBCASE("edge-of-cell SF12 node moves four steps up in rate") {
    GatewayRecord gw = make_gateway();
    feed(gw, 0, 12, 2.08, 20);
    // margin = 2.08 + 20 - 10 = 12.08 dB -> 4 steps of 3 dB
    const auto d = compute_adr(gw, 0);
    REQUIRE(d.has_value());
    CHECK(d->target_dr.index == 4);
    CHECK(d->target_power == 14);
  }
  SUBCASE("exactly the device margin means no change") {
    GatewayRecord gw = make_gateway();
    feed(gw, 0, 9, -12.5 + 10.0, 20);
    CHECK_FALSE(compute_adr(gw, 0).has_value());
  }
  SUBCASE("leftover steps lower power after the top data rate") {
    GatewayRecord gw = make_gateway();
    feed(gw, 0, 8, 15.0, 20);
    // margin = 15 + 10 - 10 = 15 -> 5 steps: DR4->DR5 then 14->11->8->5->2
    const auto d = compute_adr(gw, 0);
    REQUIRE(d.has_value());
    CHECK(d->target_dr.index == 5);
    CHECK(d->target_power == 2);
  }
  SUBCASE("saturated node gets nothing") {
    GatewayRecord gw = make_gateway();
    feed(gw, 0, 7, 30.0, 20, 2);
    CHECK_FALSE(compute_adr(gw, 0).has_value());
  }
  SUBCASE("nodes without ADR are left alone") {
    GatewayRecord gw = make_gateway();
    for (int i = 0; i < 20; ++i) {
      Packet p = uplink(0, 12, 10.0, static_cast<std::uint64_t>(i));
      p.adr = false;
      receive_uplink(gw, p);
    }
    CHECK_FALSE(compute_adr(gw, 0).has_value());
  }
}

TEST_CASE("ADR decisions stay in range and settle on a static channel") {
  const EnergyProfile profile;
  for (int sf = 7; sf <= 12; ++sf) {
    for (double path_snr = -20.0; path_snr <= 20.0; path_snr += 0.7) {
      GatewayRecord gw = make_gateway();
      int cur_sf = sf;
      int dbm = 14;
      std::uint64_t seq = 0;
      // Static channel: SNR only moves with transmit power.
      auto observe = [&] { return path_snr - (14 - dbm); };
      int decisions = 0;
      for (int round = 0; round < 10; ++round) {
        Packet last;
        for (int i = 0; i < 20; ++i) {
          last = uplink(0, cur_sf, observe(), seq, dbm, 1000.0 * static_cast<double>(seq));
          ++seq;
          receive_uplink(gw, last);
        }
        const auto d = compute_adr(gw, 0);
        if (!d) break;
        ++decisions;
        CHECK(d->target_dr.index >= 0);
        CHECK(d->target_dr.index <= 5);
        CHECK(gw.tx_power.contains(d->target_power));
        CHECK(d->target_dr >= dr_of_sf(cur_sf));
        CHECK(d->target_power <= dbm);
        REQUIRE(schedule_downlink(gw, last, false, d, profile, seq).has_value());
        // Once delivered, the same evidence never yields a second command.
        CHECK_FALSE(compute_adr(gw, 0).has_value());
        cur_sf = sf_of_dr(d->target_dr);
        dbm = d->target_power;
      }
      // A 2.5 dB floor shift per data-rate step can leave one more 3 dB
      // step on fresh samples, but never more than a few rounds.
      CHECK(decisions <= 3);
    }
  }
}

TEST_CASE("downlink slot choice") {
  const EnergyProfile profile;
  SUBCASE("nothing to say means no downlink") {
    GatewayRecord gw = make_gateway();
    CHECK_FALSE(schedule_downlink(gw, uplink(0, 12, 0.0, 0), false, std::nullopt, profile, 1));
  }
  SUBCASE("SF12 ACK goes to RX2 at SF9") {
    GatewayRecord gw = make_gateway();
    const Packet up = uplink(0, 12, 0.0, 0);
    const auto dl = schedule_downlink(gw, up, true, std::nullopt, profile, 1);
    REQUIRE(dl.has_value());
    CHECK(dl->slot == RxSlot::rx2);
    CHECK(dl->packet.params.sf == 9);
    CHECK(dl->packet.freq == 868.525e6);
    CHECK(dl->packet.start == doctest::Approx(up.end() + 2.0));
  }
  SUBCASE("SF9 ACK ties and takes RX1") {
    GatewayRecord gw = make_gateway();
    const Packet up = uplink(0, 9, 0.0, 0);
    const auto dl = schedule_downlink(gw, up, true, std::nullopt, profile, 1);
    REQUIRE(dl.has_value());
    CHECK(dl->slot == RxSlot::rx1);
    CHECK(dl->packet.freq == up.freq);
  }
  SUBCASE("chosen slot is the cheaper permitted one") {
    const MacSettings mac;
    for (int sf = 7; sf <= 12; ++sf) {
      GatewayRecord gw = make_gateway();
      const Packet up = uplink(0, sf, 0.0, 0);
      const auto dl = schedule_downlink(gw, up, true, std::nullopt, profile, 1);
      REQUIRE(dl.has_value());
      const double rx1_air = oracle::airtime_s(sf, 125000, 1, 8, true, false, sf >= 11, 13);
      const double rx2_air = oracle::airtime_s(9, 125000, 1, 8, true, false, false, 13);
      const double e1 = receive_energy(profile, mac, up.params, RxSlot::rx1, rx1_air);
      const double e2 = receive_energy(profile, mac, up.params, RxSlot::rx2, rx2_air);
      CHECK(dl->slot == (e2 < e1 ? RxSlot::rx2 : RxSlot::rx1));
    }
  }
  SUBCASE("RX1 band busy falls back to RX2") {
    GatewayRecord gw = make_gateway();
    gw.bands[0].next_allowed_tx = 1e9;
    const auto dl = schedule_downlink(gw, uplink(0, 7, 0.0, 0), true, std::nullopt, profile, 1);
    REQUIRE(dl.has_value());
    CHECK(dl->slot == RxSlot::rx2);
  }
  SUBCASE("both bands exhausted drops the ACK") {
    GatewayRecord gw = make_gateway();
    for (Band& b : gw.bands) b.next_allowed_tx = 1e9;
    CHECK_FALSE(schedule_downlink(gw, uplink(4, 7, 0.0, 0), true, std::nullopt, profile, 1));
    CHECK(gw.counters.acks_dropped == 1);
    CHECK(gw.counters.downlinks_dropped == 1);
    CHECK(gw.find(4)->acks_dropped == 1);
  }
  SUBCASE("a sent downlink books gateway airtime") {
    GatewayRecord gw = make_gateway();
    const auto dl = schedule_downlink(gw, uplink(0, 7, 0.0, 0), true, std::nullopt, profile, 1);
    REQUIRE(dl.has_value());
    CHECK(gw.bands[0].next_allowed_tx ==
          doctest::Approx(dl->packet.start + dl->packet.airtime / 0.01));
  }
  SUBCASE("an ADR command grows the frame and restarts the history") {
    GatewayRecord gw = make_gateway();
    feed(gw, 0, 12, 2.08, 20);
    const auto d = compute_adr(gw, 0);
    const auto dl = schedule_downlink(gw, uplink(0, 12, 2.08, 99), false, d, profile, 1);
    REQUIRE(dl.has_value());
    REQUIRE(dl->command.has_value());
    CHECK(dl->packet.airtime ==
          doctest::Approx(oracle::airtime_s(9, 125000, 1, 8, true, false, false, 18)));
    CHECK(gw.find(0)->snr_history.empty());
  }
}
