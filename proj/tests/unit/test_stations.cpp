#include <doctest.h>

#include <cmath>
#include <vector>

#include "wurba/stations.hpp"

using namespace wurba;

namespace {

struct SensorFixture {
  Simulator sim;
  PowerProfile power;
  SensorSta sta{sim, 5, 7, power, DriftedClock(Duration{0}, RngStream(1, 0)), EdcaParams{}, RngStream(1, 1)};
};

}  // namespace

TEST_CASE("zero sigma wakes exactly on target") {
  DriftedClock clock(Duration{0}, RngStream(1, 0));
  for (int i = 0; i < 100; ++i) {
    const SimTime target = milliseconds(i * 7);
    CHECK(clock.actual_wake_time(target, SimTime{0}) == target);
  }
}

TEST_CASE("drift moments and clamp to now") {
  DriftedClock clock(milliseconds(1), RngStream(5, 0));
  constexpr int kDraws = 100000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double d = to_seconds(clock.actual_wake_time(SimTime{0} + milliseconds(1000), SimTime{0}) - milliseconds(1000));
    sum += d;
    sq += d * d;
  }
  const double mean = sum / kDraws;
  const double sd = std::sqrt(sq / kDraws - mean * mean);
  CHECK(std::abs(mean) < 5 * 1e-3 / std::sqrt(double(kDraws)));
  CHECK(sd == doctest::Approx(1e-3).epsilon(0.01));

  DriftedClock wide(milliseconds(10), RngStream(6, 0));
  for (int i = 0; i < 1000; ++i) {
    CHECK(wide.actual_wake_time(milliseconds(1), milliseconds(1)) >= milliseconds(1));
  }
}

TEST_CASE("drift grows with time since resync") {
  DriftedClock clock(milliseconds(2), RngStream(1, 0), milliseconds(100));
  CHECK(clock.effective_sigma(milliseconds(100)) == milliseconds(2));
  CHECK(clock.effective_sigma(milliseconds(50)) == milliseconds(1));
  clock.resync(milliseconds(50));
  CHECK(clock.effective_sigma(milliseconds(150)) == milliseconds(2));

  DriftedClock bounded(milliseconds(10), RngStream(2, 0), Duration{0}, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const auto shift = bounded.actual_wake_time(SimTime{0} + std::chrono::seconds(10), SimTime{0}) - std::chrono::seconds(10);
    CHECK(std::abs(shift.count()) <= microseconds(200).count());
  }
}

TEST_CASE("sigma from oscillator accuracy") {
  // 100 ppm over one hour is 0.36 s worst case, i.e. 0.09 s at 4 sigma.
  CHECK(sigma_for_ppm(100.0, std::chrono::hours(1)) == milliseconds(90));
  CHECK(sigma_for_ppm(20.0, std::chrono::seconds(1), 2.0) == microseconds(10));
  CHECK_THROWS_AS(sigma_for_ppm(-1.0, std::chrono::seconds(1)), ConfigError);
}

TEST_CASE("partial timestamps round trip near the local estimate") {
  RngStream rng(4, 0);
  for (int i = 0; i < 1000; ++i) {
    const SimTime t{static_cast<std::int64_t>(rng.uniform_int(3'600'000'000'000ULL)) / 1'024'000 * 1'024'000};
    const std::int64_t err_us = static_cast<std::int64_t>(rng.uniform_int(4'000'000)) - 2'000'000;
    const SimTime estimate = std::max(SimTime{0}, t + microseconds(err_us));
    CHECK(partial_timestamp(t) < 4096);
    CHECK(reconstruct_timestamp(partial_timestamp(t), estimate) == t);
  }
}

TEST_CASE("duty-cycle window") {
  DutyCycleSchedule s{milliseconds(100), milliseconds(10), milliseconds(5)};
  CHECK_NOTHROW(s.validate());
  CHECK(wur_window(s, milliseconds(9)) == WurState::Off);
  CHECK(wur_window(s, milliseconds(10)) == WurState::On);
  CHECK(wur_window(s, milliseconds(14) + Duration{999}) == WurState::On);
  CHECK(wur_window(s, milliseconds(15)) == WurState::Off);
  CHECK(wur_window(s, milliseconds(212)) == WurState::On);
  CHECK(s.next_window_start(milliseconds(11)) == milliseconds(110));
  CHECK(s.next_window_start(milliseconds(110)) == milliseconds(110));
  DutyCycleSchedule bad{milliseconds(10), Duration{0}, milliseconds(11)};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("PCR and WUR are never both active") {
  SensorFixture f;
  f.sta.set_wur(WurState::On);
  CHECK_THROWS_AS(f.sta.set_pcr(PcrState::Listening), ModelError);
  CHECK_THROWS_AS(f.sta.set_pcr(PcrState::Transmitting), ModelError);
  f.sta.set_wur(WurState::Off);
  f.sta.set_pcr(PcrState::Listening);
  CHECK_THROWS_AS(f.sta.set_wur(WurState::On), ModelError);
}

TEST_CASE("PCR power-on takes the switch-on delay at listen power") {
  SensorFixture f;
  f.sta.set_wur(WurState::On);
  SimTime ready_seen = kTimeNever;
  const SimTime ready = f.sta.pcr_power_on([&] { ready_seen = f.sim.now(); });
  CHECK(ready == milliseconds(2));
  CHECK(f.sta.pcr_state() == PcrState::SwitchingOn);
  f.sim.run();
  CHECK(ready_seen == milliseconds(2));
  CHECK(f.sta.pcr_state() == PcrState::Listening);
  CHECK(f.sta.wur_state() == WurState::Off);
  // 2 ms at 100 mW plus the WUR at 0.5 mW
  CHECK(f.sta.ledger().energy_until(f.sim.now()) == doctest::Approx(2e-3 * 100.5e-3).epsilon(1e-12));
  CHECK_THROWS_AS(f.sta.pcr_power_on(), ModelError);
}

TEST_CASE("WUR frame handling") {
  SensorFixture f;
  WurFrame wake;
  wake.address = 7;
  CHECK(f.sta.process_wur_frame(wake) == WurAction::PowerOn);
  wake.address = 8;
  CHECK(f.sta.process_wur_frame(wake) == WurAction::None);
  wake.address = kBroadcastAddress;
  CHECK(f.sta.process_wur_frame(wake) == WurAction::PowerOn);

  WurFrame beacon;
  beacon.type = WurFrameType::WurBeacon;
  beacon.td_control = partial_timestamp(milliseconds(1024));
  f.sim.schedule(milliseconds(1030), [&] { CHECK(f.sta.process_wur_frame(beacon) == WurAction::Resync); });
  f.sim.run();
  CHECK(f.sta.clock().last_sync() == milliseconds(1024));

  WurFrame discovery;
  discovery.type = WurFrameType::WurDiscovery;
  discovery.address = 7;
  CHECK(f.sta.process_wur_frame(discovery) == WurAction::None);
}

TEST_CASE("sensor receives WUR PPDUs only with the WUR on since the start") {
  SensorFixture f;
  Medium medium(f.sim);
  medium.attach(f.sta);
  std::vector<WurAction> actions;
  f.sta.on_wur_frame = [&](const WurFrame&, WurAction a) { actions.push_back(a); };
  WurFrame wake;
  wake.address = 7;
  auto send = [&] {
    Ppdu p;
    p.source = 0;
    p.destination = 5;
    p.kind = FrameKind::Wur;
    p.duration = microseconds(920);
    p.wur_bits = serialize_mac(wake);
    medium.begin_tx(p);
  };
  f.sim.schedule(microseconds(0), send);
  f.sim.schedule(microseconds(100), [&] { f.sta.set_wur(WurState::On); });
  f.sim.schedule(microseconds(2000), send);
  f.sim.run();
  CHECK(actions == std::vector<WurAction>{WurAction::PowerOn});
}
