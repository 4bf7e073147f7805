#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "wurba/phy_channel.hpp"
#include "wurba/sim_kernel.hpp"

namespace wurba {

/// EDCA parameters for one access category. Defaults are best effort.
struct EdcaParams {
  std::uint32_t aifsn = 3;
  std::uint32_t cw_min = 15;
  std::uint32_t cw_max = 1023;
  Duration slot = microseconds(9);
  Duration sifs = microseconds(16);

  Duration aifs() const { return sifs + slot * static_cast<std::int64_t>(aifsn); }
  /// Throws ConfigError unless cw_min <= cw_max and both are 2^k - 1.
  void validate() const;
};

/// Frame exchange timing. Control frames go at the base legacy rate.
struct ExchangeTiming {
  Duration sifs = microseconds(16);
  Duration slot = microseconds(9);
  Duration ack = microseconds(44);
  Duration cts = microseconds(44);
  Duration trigger = microseconds(100);
  Duration ps_poll = microseconds(44);
  Duration data = microseconds(1480);

  /// DATA + SIFS + ACK.
  Duration data_exchange() const { return data + sifs + ack; }
};

enum class EdcaState : std::uint8_t { Idle, Deferring, BackingOff, Transmitting };

/// Whether an attempt's outcome moves the backoff state. WUR frames are
/// sent without acknowledgment and never grow the contention window.
enum class OutcomeRule : std::uint8_t { Acknowledged, WurUnacknowledged };

/// One EDCA transmit queue. Owned by a station, driven by the
/// ChannelAccessManager.
class EdcaEntity {
public:
  EdcaEntity(StationId owner, EdcaParams params, RngStream rng);

  StationId owner() const { return owner_; }
  const EdcaParams& params() const { return params_; }
  std::uint32_t cw() const { return cw_; }
  std::uint32_t retry_count() const { return retry_count_; }
  std::uint32_t backoff() const { return backoff_; }
  EdcaState state() const { return state_; }
  /// Counter value drawn for the most recent access.
  std::uint32_t last_draw() const { return last_draw_; }

  /// Called when the counter reaches zero on an idle medium.
  std::function<void()> on_grant;

  /// Forgets the current backoff and restarts from cw_min.
  void reset_window();

private:
  friend class ChannelAccessManager;

  StationId owner_;
  EdcaParams params_;
  RngStream rng_;
  std::uint32_t cw_;
  std::uint32_t retry_count_ = 0;
  std::uint32_t backoff_ = 0;
  std::uint32_t last_draw_ = 0;
  bool needs_draw_ = true;
  EdcaState state_ = EdcaState::Idle;
  SimTime contention_start_{0};
  SimTime blocked_until_{0};
  SimTime grant_time_ = kTimeNever;
};

/// Coordinates every contending EdcaEntity against the shared medium:
/// AIFS, slot countdown frozen while busy (physical or NAV), and
/// simultaneous grants for equal counters (which then collide).
class ChannelAccessManager final : public MediumObserver {
public:
  ChannelAccessManager(Simulator& sim, Medium& medium);
  ChannelAccessManager(const ChannelAccessManager&) = delete;
  ChannelAccessManager& operator=(const ChannelAccessManager&) = delete;
  ~ChannelAccessManager() override;

  /// Starts contention at now(); draws a counter in [0, cw] if the entity
  /// has none pending.
  void request_access(EdcaEntity& entity);
  void cancel_access(EdcaEntity& entity);

  /// Data/control: success resets cw and the retry count, failure doubles
  /// cw (capped at cw_max). WUR frames leave both untouched. A new counter
  /// is drawn on the next request either way.
  void on_outcome(EdcaEntity& entity, OutcomeRule rule, bool success);

  /// Treats the medium as busy for this entity from now until release().
  void block(EdcaEntity& entity);
  void release(EdcaEntity& entity);

  /// Earliest grant instant for a contending entity given the current
  /// medium state, or kTimeNever.
  SimTime grant_time(const EdcaEntity& entity) const;

  void on_busy(SimTime t) override;
  void on_idle(SimTime t) override;
  void on_nav_changed(StationId station, SimTime t) override;

private:
  SimTime idle_reference(const EdcaEntity& entity) const;
  void settle(EdcaEntity& entity, SimTime t);
  void reschedule();
  void fire();

  Simulator& sim_;
  Medium& medium_;
  std::vector<EdcaEntity*> contenders_;
  EventHandle pending_event_;
  SimTime pending_time_ = kTimeNever;
};

struct ExchangeResult {
  bool success = false;
  /// ACK end on success; instant the missing ACK would have ended otherwise.
  SimTime end{0};
  std::uint64_t data_id = 0;
};

struct ExchangeHooks {
  /// DATA has ended; ppdu.corrupted tells whether the receiver got it.
  std::function<void(const Ppdu& data)> data_ended;
  std::function<void(const ExchangeResult&)> completed;
};

/// DATA, SIFS, ACK. The receiver answers only an intact DATA; the sender
/// succeeds only on an intact ACK.
void exchange_data_ack(Simulator& sim, Medium& medium, const ExchangeTiming& timing, StationId sender,
                       StationId receiver, bool transaction, ExchangeHooks hooks);

/// A single PPDU with no acknowledgment (WUR frame, CTS-to-self, TF).
std::uint64_t send_unacked(Medium& medium, Ppdu ppdu, Medium::EndCallback on_end = {});

}  // namespace wurba
