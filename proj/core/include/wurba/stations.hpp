#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "wurba/mac_edca.hpp"
#include "wurba/metrics.hpp"
#include "wurba/phy_channel.hpp"
#include "wurba/sim_kernel.hpp"
#include "wurba/wur_codec.hpp"

namespace wurba {

/// Radio power draw (mW) and PCR switch-on latency.
struct PowerProfile {
  double pcr_tx_mw = 280.0;
  double pcr_listen_mw = 100.0;
  double pcr_doze_mw = 0.05;
  double wur_on_mw = 0.5;
  double wur_off_mw = 0.0;
  /// Power while the PCR switches on; unset means pcr_listen_mw.
  std::optional<double> pcr_switch_on_mw;
  Duration pcr_switch_on_delay = milliseconds(2);

  double switch_on_mw() const { return pcr_switch_on_mw.value_or(pcr_listen_mw); }
  PowerTable table() const;
  void validate() const;
};

/// Wake-up instants shifted by Gaussian clock drift.
///
/// With a zero reference interval every shift has standard deviation
/// `sigma`. With a positive reference interval the deviation grows
/// linearly with the time since the last resynchronisation and equals
/// `sigma` after one reference interval. A positive `max_ppm` clamps a
/// shift to the drift an oscillator of that accuracy can accumulate.
class DriftedClock {
public:
  DriftedClock(Duration sigma, RngStream rng, Duration reference_interval = Duration{0}, double max_ppm = 0.0);

  Duration sigma() const { return sigma_; }
  SimTime last_sync() const { return last_sync_; }
  Duration effective_sigma(SimTime target) const;

  /// target + N(0, effective sigma^2), never earlier than `now`.
  SimTime actual_wake_time(SimTime target, SimTime now);

  /// Clears accumulated drift as of `t`.
  void resync(SimTime t) { last_sync_ = t; }

private:
  Duration sigma_;
  RngStream rng_;
  Duration reference_interval_;
  double max_ppm_;
  SimTime last_sync_{0};
};

/// Standard deviation such that `sigmas` deviations equal the worst-case
/// drift of a `ppm` oscillator over `interval` (4 sigma by default).
Duration sigma_for_ppm(double ppm, Duration interval, double sigmas = 4.0);

/// Beacon TD-control timestamp: bits 10..21 of the microsecond clock
/// (1.024 ms units, wraps every ~4.2 s).
std::uint16_t partial_timestamp(SimTime t);
/// Full time whose partial timestamp matches and which lies closest to the
/// local estimate.
SimTime reconstruct_timestamp(std::uint16_t partial, SimTime local_estimate);

/// Strictly periodic WUR on-windows agreed with the AP.
struct DutyCycleSchedule {
  Duration period{0};
  Duration on_offset{0};
  Duration on_duration{0};

  void validate() const;
  /// Start of the first window beginning at or after t.
  SimTime next_window_start(SimTime t) const;
};

/// On iff (local_time mod period) is inside [on_offset, on_offset + on_duration).
WurState wur_window(const DutyCycleSchedule& schedule, SimTime local_time);

enum class WurAction : std::uint8_t { None, PowerOn, Resync };

/// Sensor station with a PCR and a WUR receiver.
class SensorSta final : public RadioNode {
public:
  SensorSta(Simulator& sim, StationId id, std::uint16_t wur_address, const PowerProfile& power,
            DriftedClock clock, EdcaParams edca, RngStream backoff_rng, bool keep_ledger_history = false);

  StationId station_id() const override { return id_; }
  std::uint16_t wur_address() const { return wur_address_; }
  PcrState pcr_state() const { return ledger_.pcr(); }
  WurState wur_state() const { return ledger_.wur(); }
  DriftedClock& clock() { return clock_; }
  EdcaEntity& edca() { return edca_; }
  EnergyLedger& ledger() { return ledger_; }
  const EnergyLedger& ledger() const { return ledger_; }
  const PowerProfile& power() const { return power_; }

  /// Doze -> SwitchingOn now, Listening after the switch-on delay; on_ready
  /// runs at that instant. Returns the ready time.
  SimTime pcr_power_on(std::function<void()> on_ready = {});
  void set_pcr(PcrState state);
  /// WUR on requires the PCR to be dozing or switching on.
  void set_wur(WurState state);
  void doze();

  /// Interprets a received WUR frame. A wake-up with our address (or the
  /// broadcast address) asks for PCR power-on, a beacon resynchronises the
  /// clock, anything else is ignored.
  WurAction process_wur_frame(const WurFrame& frame);
  void apply_beacon_resync(std::uint16_t partial);

  bool can_receive(const Ppdu& ppdu) const override;
  void receive(const Ppdu& ppdu) override;

  /// Legacy PPDUs heard by the PCR.
  std::function<void(const Ppdu&)> on_legacy_frame;
  /// WUR frames that passed the FCS check, with the resulting action.
  std::function<void(const WurFrame&, WurAction)> on_wur_frame;

  std::uint64_t fcs_failures() const { return fcs_failures_; }

private:
  Simulator& sim_;
  StationId id_;
  std::uint16_t wur_address_;
  PowerProfile power_;
  DriftedClock clock_;
  EdcaEntity edca_;
  EnergyLedger ledger_;
  SimTime pcr_listening_since_ = kTimeNever;
  SimTime wur_on_since_ = kTimeNever;
  std::uint64_t fcs_failures_ = 0;
};

/// Full-buffer station: always holds a DATA frame for the AP and contends
/// again right after every exchange.
class SaturatedSta final : public RadioNode {
public:
  SaturatedSta(Simulator& sim, Medium& medium, ChannelAccessManager& cam, const ExchangeTiming& timing,
               StationId id, StationId ap, EdcaParams edca, RngStream backoff_rng);

  /// Begins contending now.
  void start();

  StationId station_id() const override { return id_; }
  bool can_receive(const Ppdu& ppdu) const override;
  void receive(const Ppdu&) override {}

  EdcaEntity& edca() { return edca_; }
  std::uint64_t successes() const { return successes_; }
  std::uint64_t failures() const { return failures_; }

private:
  void transmit();

  Simulator& sim_;
  Medium& medium_;
  ChannelAccessManager& cam_;
  ExchangeTiming timing_;
  StationId id_;
  StationId ap_;
  EdcaEntity edca_;
  std::uint64_t successes_ = 0;
  std::uint64_t failures_ = 0;
};

/// The access point's receiver; the methods drive its transmissions.
class AccessPoint final : public RadioNode {
public:
  AccessPoint(StationId id, EdcaParams edca, RngStream backoff_rng, RngStream beacon_rng)
      : id_(id), edca_(id, edca, std::move(backoff_rng)), beacon_edca_(id, edca, std::move(beacon_rng)) {}

  StationId station_id() const override { return id_; }
  bool can_receive(const Ppdu& ppdu) const override { return classify(ppdu.kind) != PpduClass::Wur; }
  void receive(const Ppdu& ppdu) override {
    if (on_frame) on_frame(ppdu);
  }

  EdcaEntity& edca() { return edca_; }
  EdcaEntity& beacon_edca() { return beacon_edca_; }

  std::function<void(const Ppdu&)> on_frame;

private:
  StationId id_;
  EdcaEntity edca_;
  EdcaEntity beacon_edca_;
};

}  // namespace wurba
