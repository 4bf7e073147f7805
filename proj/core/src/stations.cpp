#include "wurba/stations.hpp"

#include <algorithm>
#include <cmath>

namespace wurba {

PowerTable PowerProfile::table() const {
  PowerTable t;
  t.pcr_mw[static_cast<std::size_t>(PcrState::Doze)] = pcr_doze_mw;
  t.pcr_mw[static_cast<std::size_t>(PcrState::SwitchingOn)] = switch_on_mw();
  t.pcr_mw[static_cast<std::size_t>(PcrState::Listening)] = pcr_listen_mw;
  t.pcr_mw[static_cast<std::size_t>(PcrState::Transmitting)] = pcr_tx_mw;
  t.wur_mw[static_cast<std::size_t>(WurState::Off)] = wur_off_mw;
  t.wur_mw[static_cast<std::size_t>(WurState::On)] = wur_on_mw;
  return t;
}

void PowerProfile::validate() const {
  auto check = [](double v, const char* key) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(key, "power must be a finite non-negative value");
  };
  check(pcr_tx_mw, "p_pcr_tx_mw");
  check(pcr_listen_mw, "p_pcr_listen_mw");
  check(pcr_doze_mw, "p_pcr_doze_mw");
  check(wur_on_mw, "p_wur_on_mw");
  check(wur_off_mw, "p_wur_off_mw");
  check(switch_on_mw(), "p_pcr_switch_on_mw");
  if (pcr_switch_on_delay.count() < 0) {
    throw ConfigError("switch_on_delay_us", "switch-on delay must be non-negative");
  }
}

DriftedClock::DriftedClock(Duration sigma, RngStream rng, Duration reference_interval, double max_ppm)
    : sigma_(sigma), rng_(std::move(rng)), reference_interval_(reference_interval), max_ppm_(max_ppm) {
  if (sigma.count() < 0) throw ConfigError("sigma", "clock drift sigma must be non-negative");
  if (reference_interval.count() < 0) throw ConfigError("drift_reference_us", "must be non-negative");
  if (max_ppm < 0.0) throw ConfigError("max_ppm", "must be non-negative");
}

Duration DriftedClock::effective_sigma(SimTime target) const {
  if (reference_interval_.count() == 0) {
    return sigma_;
  }
  const auto elapsed = std::max<std::int64_t>(0, (target - last_sync_).count());
  const double scale = static_cast<double>(elapsed) / static_cast<double>(reference_interval_.count());
  return Duration{std::llround(static_cast<double>(sigma_.count()) * scale)};
}

SimTime DriftedClock::actual_wake_time(SimTime target, SimTime now) {
  Duration shift = sample_normal(rng_, Duration{0}, effective_sigma(target));
  if (max_ppm_ > 0.0) {
    const auto elapsed = std::max<std::int64_t>(0, (target - last_sync_).count());
    const Duration bound{std::llround(max_ppm_ * 1e-6 * static_cast<double>(elapsed))};
    shift = std::clamp(shift, -bound, bound);
  }
  return std::max(target + shift, now);
}

Duration sigma_for_ppm(double ppm, Duration interval, double sigmas) {
  if (ppm < 0.0 || sigmas <= 0.0) throw ConfigError("ppm and sigma multiple must be positive");
  return Duration{std::llround(ppm * 1e-6 * static_cast<double>(interval.count()) / sigmas)};
}

namespace {
constexpr std::int64_t kTimestampUnitNs = 1024 * 1000;
constexpr std::int64_t kTimestampWrap = 4096;
}  // namespace

std::uint16_t partial_timestamp(SimTime t) {
  return static_cast<std::uint16_t>((t.count() / kTimestampUnitNs) % kTimestampWrap);
}

SimTime reconstruct_timestamp(std::uint16_t partial, SimTime local_estimate) {
  const std::int64_t local_units = local_estimate.count() / kTimestampUnitNs;
  std::int64_t candidate = (local_units - local_units % kTimestampWrap) + (partial % kTimestampWrap);
  if (candidate - local_units > kTimestampWrap / 2) candidate -= kTimestampWrap;
  if (local_units - candidate > kTimestampWrap / 2) candidate += kTimestampWrap;
  return SimTime{std::max<std::int64_t>(0, candidate) * kTimestampUnitNs};
}

void DutyCycleSchedule::validate() const {
  if (period.count() <= 0) throw ConfigError("duty_cycle_period", "period must be positive");
  if (on_duration.count() <= 0 || on_duration > period) {
    throw ConfigError("duty_cycle_on_duration", "on-duration must lie in (0, period]");
  }
  if (on_offset.count() < 0 || on_offset >= period) {
    throw ConfigError("duty_cycle_offset", "offset must lie in [0, period)");
  }
}

SimTime DutyCycleSchedule::next_window_start(SimTime t) const {
  if (t <= on_offset) return on_offset;
  const std::int64_t k = ((t - on_offset).count() + period.count() - 1) / period.count();
  return on_offset + period * k;
}

WurState wur_window(const DutyCycleSchedule& schedule, SimTime local_time) {
  auto phase = (local_time - schedule.on_offset).count() % schedule.period.count();
  if (phase < 0) phase += schedule.period.count();
  return phase < schedule.on_duration.count() ? WurState::On : WurState::Off;
}

SensorSta::SensorSta(Simulator& sim, StationId id, std::uint16_t wur_address, const PowerProfile& power,
                     DriftedClock clock, EdcaParams edca, RngStream backoff_rng, bool keep_ledger_history)
    : sim_(sim),
      id_(id),
      wur_address_(wur_address),
      power_(power),
      clock_(std::move(clock)),
      edca_(id, edca, std::move(backoff_rng)),
      ledger_(power.table(), sim.now(), PcrState::Doze, WurState::Off, keep_ledger_history) {
  if (wur_address > kMaxAddress) throw ConfigError("WUR address exceeds 12 bits");
}

SimTime SensorSta::pcr_power_on(std::function<void()> on_ready) {
  if (pcr_state() != PcrState::Doze) {
    throw ModelError("PCR power-on requested while not dozing");
  }
  set_pcr(PcrState::SwitchingOn);
  const SimTime ready = sim_.now() + power_.pcr_switch_on_delay;
  sim_.schedule(ready, [this, cb = std::move(on_ready)] {
    if (wur_state() == WurState::On) {
      set_wur(WurState::Off);
    }
    set_pcr(PcrState::Listening);
    if (cb) cb();
  });
  return ready;
}

void SensorSta::set_pcr(PcrState state) {
  if ((state == PcrState::Listening || state == PcrState::Transmitting) && wur_state() == WurState::On) {
    throw ModelError("PCR active while the WUR is on");
  }
  if (state == PcrState::Listening && pcr_state() != PcrState::Listening) {
    pcr_listening_since_ = sim_.now();
  } else if (state != PcrState::Listening) {
    pcr_listening_since_ = kTimeNever;
  }
  ledger_.transition(sim_.now(), state, wur_state());
}

void SensorSta::set_wur(WurState state) {
  if (state == WurState::On && pcr_state() != PcrState::Doze && pcr_state() != PcrState::SwitchingOn) {
    throw ModelError("WUR switched on while the PCR is active");
  }
  if (state == WurState::On && wur_state() != WurState::On) {
    wur_on_since_ = sim_.now();
  } else if (state == WurState::Off) {
    wur_on_since_ = kTimeNever;
  }
  ledger_.transition(sim_.now(), pcr_state(), state);
}

void SensorSta::doze() {
  ledger_.transition(sim_.now(), PcrState::Doze, WurState::Off);
  pcr_listening_since_ = kTimeNever;
  wur_on_since_ = kTimeNever;
}

WurAction SensorSta::process_wur_frame(const WurFrame& frame) {
  switch (frame.type) {
    case WurFrameType::WakeUp:
      return (frame.address == wur_address_ || frame.address == kBroadcastAddress) ? WurAction::PowerOn
                                                                                   : WurAction::None;
    case WurFrameType::WurBeacon:
      apply_beacon_resync(frame.td_control);
      return WurAction::Resync;
    default:
      return WurAction::None;
  }
}

void SensorSta::apply_beacon_resync(std::uint16_t partial) {
  clock_.resync(reconstruct_timestamp(partial, sim_.now()));
}

bool SensorSta::can_receive(const Ppdu& ppdu) const {
  if (classify(ppdu.kind) == PpduClass::Wur) {
    return wur_state() == WurState::On && wur_on_since_ <= ppdu.start;
  }
  return pcr_state() == PcrState::Listening && pcr_listening_since_ <= ppdu.start;
}

void SensorSta::receive(const Ppdu& ppdu) {
  if (classify(ppdu.kind) != PpduClass::Wur) {
    if (on_legacy_frame) on_legacy_frame(ppdu);
    return;
  }
  if (!ppdu.wur_bits) {
    return;
  }
  WurFrame frame;
  try {
    frame = deserialize_mac(*ppdu.wur_bits);
  } catch (const CodecError&) {
    ++fcs_failures_;
    return;
  }
  const WurAction action = process_wur_frame(frame);
  if (on_wur_frame) on_wur_frame(frame, action);
}

SaturatedSta::SaturatedSta(Simulator& sim, Medium& medium, ChannelAccessManager& cam, const ExchangeTiming& timing,
                           StationId id, StationId ap, EdcaParams edca, RngStream backoff_rng)
    : sim_(sim), medium_(medium), cam_(cam), timing_(timing), id_(id), ap_(ap), edca_(id, edca, std::move(backoff_rng)) {
  edca_.on_grant = [this] { transmit(); };
}

void SaturatedSta::start() { cam_.request_access(edca_); }

bool SaturatedSta::can_receive(const Ppdu& ppdu) const {
  return classify(ppdu.kind) != PpduClass::Wur && !medium_.is_transmitting(id_);
}

void SaturatedSta::transmit() {
  ExchangeHooks hooks;
  hooks.completed = [this](const ExchangeResult& r) {
    cam_.on_outcome(edca_, OutcomeRule::Acknowledged, r.success);
    r.success ? ++successes_ : ++failures_;
    cam_.request_access(edca_);
  };
  exchange_data_ack(sim_, medium_, timing_, id_, ap_, false, std::move(hooks));
}

}  // namespace wurba
