#include "wurba/methods.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <optional>

#include <fmt/format.h>

#include "wurba/stations.hpp"

namespace wurba {

TwtSchedule build_schedule(const ScenarioConfig& config, MethodKind method, Duration sigma) {
  if (sigma.count() < 0) throw ConfigError("sigma_list", "sigma must be >= 0");
  const Duration guard = config.guard_for(sigma);
  const Duration exchange = config.timing.data_exchange();
  const Duration delay = config.power.pcr_switch_on_delay;
  const std::uint32_t n = config.sensors;
  const std::uint32_t total = config.frames_per_run;

  TwtSchedule schedule;
  schedule.slots.reserve(total);

  if (method == MethodKind::TwtGuard) {
    schedule.spacing = 2 * config.timing.data;
    // Saturated stations are held off from reservation start minus one
    // exchange, so the round also pays for that lead.
    const Duration round_period = 2 * guard + static_cast<std::int64_t>(n - 1) * schedule.spacing + exchange +
                                  config.isolation_margin + exchange;
    SimTime first = SimTime{0} + config.warmup + guard + delay + exchange;
    for (std::uint32_t round = 0; round * n < total; ++round) {
      TwtSchedule::Group group;
      group.reservation_start = first - guard;
      group.first_target = first;
      for (std::uint32_t k = 0; k < n && round * n + k < total; ++k) {
        TwtSchedule::Slot slot{k, round, first + static_cast<std::int64_t>(k) * schedule.spacing};
        group.last_target = slot.target;
        group.slots.push_back(schedule.slots.size());
        schedule.slots.push_back(slot);
      }
      schedule.groups.push_back(std::move(group));
      first += round_period;
    }
  } else {
    const Duration min_gap = 2 * guard + exchange;
    Duration gap = 2 * guard + config.isolation_margin;
    if (config.target_gap.count() > 0) {
      if (config.target_gap < min_gap) {
        throw ConfigError("target_gap_us",
                          fmt::format("{} us is shorter than 2 * guard + exchange = {} us",
                                      to_microseconds(config.target_gap), to_microseconds(min_gap)));
      }
      gap = config.target_gap;
    }
    schedule.spacing = gap;
    const SimTime first = SimTime{0} + config.warmup + guard + delay;
    for (std::uint32_t f = 0; f < total; ++f) {
      schedule.slots.push_back({f % n, f / n, first + static_cast<std::int64_t>(f) * gap});
    }
  }
  schedule.last_target = schedule.slots.back().target;
  return schedule;
}

namespace {

constexpr StationId kApId = 0;

class ScenarioRun {
public:
  ScenarioRun(const ScenarioConfig& config, MethodKind method, Duration sigma, std::uint64_t seed,
              const RunOptions& options)
      : config_(config),
        method_(method),
        sigma_(sigma),
        seed_(seed),
        options_(options),
        medium_(sim_),
        cam_(sim_, medium_),
        ap_(kApId, config.edca, RngStream(seed, stream_id_for(kApId, StreamPurpose::Backoff)),
            RngStream(seed, stream_id_for(kApId, StreamPurpose::Misc))),
        channel_(config.timing.sifs),
        schedule_(build_schedule(config, method, sigma)),
        guard_(config.guard_for(sigma)),
        rule_(method == MethodKind::WurCts ? OutcomeRule::WurUnacknowledged : OutcomeRule::Acknowledged) {
    medium_.set_observer(&cam_);
    medium_.set_trace(options.trace);
    medium_.set_cluster_sink([this](std::span<const Ppdu> cluster) { account_cluster(cluster); });
    medium_.attach(ap_);
    ap_.edca().on_grant = [this] { ap_transmit(); };
    ap_.beacon_edca().on_grant = [this] { send_beacon(); };

    const std::uint32_t m = config.saturated_stations;
    for (std::uint32_t i = 0; i < m; ++i) {
      const StationId id = 1 + i;
      saturated_.push_back(std::make_unique<SaturatedSta>(sim_, medium_, cam_, config.timing, id, kApId, config.edca,
                                                          RngStream(seed, stream_id_for(id, StreamPurpose::Backoff))));
      medium_.attach(*saturated_.back());
    }
    for (std::uint32_t k = 0; k < config.sensors; ++k) {
      const StationId id = 1 + m + k;
      DriftedClock clock(sigma, RngStream(seed, stream_id_for(id, StreamPurpose::Drift)), config.drift_reference);
      auto sta = std::make_unique<SensorSta>(sim_, id, static_cast<std::uint16_t>(k + 1), config.power,
                                             std::move(clock), config.edca,
                                             RngStream(seed, stream_id_for(id, StreamPurpose::Backoff)),
                                             options.keep_ledger_history);
      sta->edca().on_grant = [this, k] { transmit_data(k); };
      sta->on_legacy_frame = [this, k](const Ppdu& ppdu) { sensor_heard(k, ppdu); };
      sta->on_wur_frame = [this, k](const WurFrame& frame, WurAction action) { sensor_woken(k, frame, action); };
      medium_.attach(*sta);
      Sensor sensor;
      sensor.sta = std::move(sta);
      sensors_.push_back(std::move(sensor));
    }

    frames_.resize(schedule_.slots.size());
    for (std::size_t i = 0; i < frames_.size(); ++i) {
      frames_[i].record.sensor = schedule_.slots[i].sensor;
      frames_[i].record.round = schedule_.slots[i].round;
      frames_[i].record.target = schedule_.slots[i].target;
    }
    groups_.resize(schedule_.groups.size());
    for (std::size_t g = 0; g < schedule_.groups.size(); ++g) {
      groups_[g].remaining = schedule_.groups[g].slots.size();
      for (std::size_t slot : schedule_.groups[g].slots) frames_[slot].group = g;
    }

    wur_bits_.resize(config.sensors);
    for (std::uint32_t k = 0; k < config.sensors; ++k) {
      WurFrame frame;
      frame.type = WurFrameType::WakeUp;
      frame.address = static_cast<std::uint16_t>(k + 1);
      wur_bits_[k] = serialize_mac(finalize(frame));
    }
    wur_airtime_ = config.wur_frame_airtime();
  }

  RunResult execute() {
    schedule_events();
    for (auto& sta : saturated_) sta->start();

    const SimTime horizon = config_.horizon.count() > 0
                                ? SimTime{0} + config_.horizon
                                : schedule_.last_target + guard_ + std::chrono::seconds(60);
    sim_.run_until(horizon);
    medium_.flush_cluster();
    return collect();
  }

private:
  struct Sensor {
    std::unique_ptr<SensorSta> sta;
    std::deque<std::size_t> queue;
    std::optional<std::size_t> current;
    bool awaiting_trigger = false;
    bool contending = false;
  };

  struct Frame {
    FrameRecord record;
    double energy_mark = 0.0;
    SimTime ready_at = kTimeNever;
    bool ap_received = false;
    std::optional<std::size_t> group;
  };

  struct GroupState {
    std::size_t remaining = 0;
    bool blocked = false;
    bool done = false;
  };

  SensorSta& sta(std::uint32_t k) { return *sensors_[k].sta; }

  // ---- setup ------------------------------------------------------------

  // Frames are handed to the event queue in batches, ahead of their
  // earliest drift draw, so long runs keep the queue small.
  static constexpr std::size_t kFeedBatch = 256;

  SimTime nominal_wake(std::size_t i) const {
    // Methods that wake by timer start the PCR switch-on ahead of the
    // target; the WUR method turns its receiver on at the target.
    const SimTime target = frames_[i].record.target;
    return method_ == MethodKind::WurCts ? target : target - config_.power.pcr_switch_on_delay;
  }

  SimTime decide_time(std::size_t i) {
    // Draw the drift shortly before any plausible wake instant; shifts
    // beyond 8 sigma are clamped to the draw time.
    const SimTime nominal = nominal_wake(i);
    const Duration lead = 8 * sta(frames_[i].record.sensor).clock().effective_sigma(nominal);
    return std::max(sim_.now(), nominal - lead);
  }

  void feed(std::size_t first) {
    const std::size_t last = std::min(frames_.size(), first + kFeedBatch);
    for (std::size_t i = first; i < last; ++i) {
      const std::uint32_t k = frames_[i].record.sensor;
      const SimTime nominal = nominal_wake(i);
      sim_.schedule(decide_time(i), [this, i, k, nominal] {
        const SimTime wake = sta(k).clock().actual_wake_time(nominal, sim_.now());
        sim_.schedule(wake, [this, i] { on_wake(i); });
      });
      if (method_ == MethodKind::TwtWithTf || method_ == MethodKind::WurCts) {
        sim_.schedule(frames_[i].record.target + guard_, [this, i] { ap_enqueue(i); });
      }
    }
    if (last == frames_.size()) return;
    SimTime next = kTimeNever;
    for (std::size_t i = last; i < std::min(frames_.size(), last + kFeedBatch); ++i) {
      next = std::min(next, decide_time(i));
    }
    sim_.schedule(next, [this, last] { feed(last); });
  }

  void schedule_events() {
    feed(0);
    for (std::size_t g = 0; g < schedule_.groups.size(); ++g) {
      const SimTime block_at =
          std::max(SimTime{0}, schedule_.groups[g].reservation_start - config_.timing.data_exchange());
      sim_.schedule(block_at, [this, g] { block_group(g); });
    }
    if (method_ == MethodKind::WurCts && config_.beacon_period.count() > 0) {
      sim_.schedule(SimTime{0} + config_.beacon_period, [this] { beacon_due(); });
    }
  }

  // ---- sensor side --------------------------------------------------------

  void on_wake(std::size_t i) {
    Sensor& s = sensors_[frames_[i].record.sensor];
    if (s.current) {
      s.queue.push_back(i);
      return;
    }
    start_frame(i);
  }

  void start_frame(std::size_t i) {
    Frame& f = frames_[i];
    const std::uint32_t k = f.record.sensor;
    Sensor& s = sensors_[k];
    s.current = i;
    f.record.window_start = sim_.now();
    f.energy_mark = s.sta->ledger().energy_until(sim_.now());
    switch (method_) {
      case MethodKind::TwtPlain:
        s.sta->pcr_power_on([this, i, k] {
          frames_[i].ready_at = sim_.now();
          contend(k);
        });
        break;
      case MethodKind::TwtWithTf:
        s.sta->pcr_power_on([this, i, k] {
          frames_[i].ready_at = sim_.now();
          sensors_[k].awaiting_trigger = true;
        });
        break;
      case MethodKind::TwtGuard:
        s.sta->pcr_power_on([this, i, k] {
          frames_[i].ready_at = sim_.now();
          guard_ready(k);
        });
        break;
      case MethodKind::WurCts:
        s.sta->set_wur(WurState::On);
        f.ready_at = sim_.now();
        s.awaiting_trigger = true;
        break;
    }
  }

  void contend(std::uint32_t k) {
    Sensor& s = sensors_[k];
    Frame& f = frames_[*s.current];
    s.contending = true;
    cam_.request_access(s.sta->edca());
    if (f.record.first_backoff < 0 && (method_ == MethodKind::TwtPlain || method_ == MethodKind::TwtGuard)) {
      f.record.first_backoff = static_cast<std::int32_t>(s.sta->edca().last_draw());
    }
  }

  void guard_ready(std::uint32_t k) {
    Sensor& s = sensors_[k];
    if (medium_.cca(s.sta->station_id(), sim_.now()) == CcaState::Idle) {
      transmit_data(k);
      return;
    }
    s.sta->edca().reset_window();
    contend(k);
  }

  void transmit_data(std::uint32_t k) {
    Sensor& s = sensors_[k];
    const std::size_t i = *s.current;
    s.contending = false;
    s.awaiting_trigger = false;
    ++frames_[i].record.data_attempts;
    s.sta->set_pcr(PcrState::Transmitting);
    ExchangeHooks hooks;
    hooks.data_ended = [this, k, i](const Ppdu& data) {
      sta(k).set_pcr(PcrState::Listening);
      if (!data.corrupted) ap_got_data(i);
    };
    hooks.completed = [this, k, i](const ExchangeResult& r) { exchange_done(k, i, r); };
    exchange_data_ack(sim_, medium_, config_.timing, s.sta->station_id(), kApId, true, std::move(hooks));
  }

  void exchange_done(std::uint32_t k, std::size_t i, const ExchangeResult& r) {
    Sensor& s = sensors_[k];
    if (r.success) {
      cam_.on_outcome(s.sta->edca(), OutcomeRule::Acknowledged, true);
      deliver(k, i);
      return;
    }
    cam_.on_outcome(s.sta->edca(), OutcomeRule::Acknowledged, false);
    if (method_ == MethodKind::TwtWithTf && !frames_[i].ap_received) {
      // The AP will trigger again after its timeout.
      s.awaiting_trigger = true;
      return;
    }
    contend(k);
  }

  void deliver(std::uint32_t k, std::size_t i) {
    Sensor& s = sensors_[k];
    Frame& f = frames_[i];
    f.record.delivered_at = sim_.now();
    f.record.energy_j = s.sta->ledger().energy_until(sim_.now()) - f.energy_mark;
    if (s.contending) {
      cam_.cancel_access(s.sta->edca());
      s.contending = false;
    }
    s.awaiting_trigger = false;
    s.current.reset();
    s.sta->doze();
    ++delivered_;
    if (f.group) group_frame_done(*f.group);
    if (delivered_ == frames_.size()) {
      sim_.stop();
      return;
    }
    if (!s.queue.empty()) {
      const std::size_t next = s.queue.front();
      s.queue.pop_front();
      start_frame(next);
    }
  }

  void sensor_heard(std::uint32_t k, const Ppdu& ppdu) {
    Sensor& s = sensors_[k];
    if (ppdu.kind != FrameKind::Trigger || ppdu.destination != s.sta->station_id() || !s.current ||
        !s.awaiting_trigger) {
      return;
    }
    s.awaiting_trigger = false;
    if (s.contending) {
      cam_.cancel_access(s.sta->edca());
      s.contending = false;
    }
    sim_.schedule_in(config_.timing.sifs, [this, k] {
      if (sensors_[k].current && sta(k).pcr_state() == PcrState::Listening) transmit_data(k);
    });
  }

  void sensor_woken(std::uint32_t k, const WurFrame& frame, WurAction action) {
    Sensor& s = sensors_[k];
    if (action == WurAction::Resync) {
      return;
    }
    if (action != WurAction::PowerOn || frame.address != s.sta->wur_address() || !s.current || !s.awaiting_trigger) {
      return;
    }
    s.awaiting_trigger = false;
    s.sta->set_wur(WurState::Off);
    s.sta->pcr_power_on([this, k] {
      sim_.schedule_in(config_.timing.sifs, [this, k] {
        if (sensors_[k].current && sta(k).pcr_state() == PcrState::Listening && !sensors_[k].contending) {
          transmit_data(k);
        }
      });
    });
  }

  // ---- guard-interval reservations -----------------------------------------

  void block_group(std::size_t g) {
    GroupState& state = groups_[g];
    if (state.done) return;
    state.blocked = true;
    for (auto& sat : saturated_) cam_.block(sat->edca());
  }

  void group_frame_done(std::size_t g) {
    GroupState& state = groups_[g];
    if (--state.remaining > 0) return;
    state.done = true;
    const SimTime start = schedule_.groups[g].reservation_start;
    const SimTime end = std::max(start, sim_.now());
    channel_.add_reserved(start, end);
    reservations_.push_back({start, end});
    if (state.blocked) {
      for (auto& sat : saturated_) cam_.release(sat->edca());
    }
  }

  // ---- AP side ----------------------------------------------------------------

  void ap_enqueue(std::size_t i) {
    ap_queue_.push_back(i);
    ap_next();
  }

  void ap_next() {
    if (ap_current_) return;
    while (!ap_queue_.empty() && frames_[ap_queue_.front()].ap_received) ap_queue_.pop_front();
    if (ap_queue_.empty()) return;
    ap_current_ = ap_queue_.front();
    ap_queue_.pop_front();
    ap_request();
  }

  void ap_request() {
    cam_.request_access(ap_.edca());
    Frame& f = frames_[*ap_current_];
    if (f.record.first_backoff < 0) f.record.first_backoff = static_cast<std::int32_t>(ap_.edca().last_draw());
  }

  void ap_transmit() {
    const std::size_t i = *ap_current_;
    Frame& f = frames_[i];
    const std::uint32_t k = f.record.sensor;
    const StationId dest = sta(k).station_id();
    ++f.record.trigger_attempts;
    const ExchangeTiming& t = config_.timing;
    if (method_ == MethodKind::TwtWithTf) {
      Ppdu tf;
      tf.source = kApId;
      tf.destination = dest;
      tf.kind = FrameKind::Trigger;
      tf.duration = t.trigger;
      tf.nav = t.sifs + t.data + t.sifs + t.ack;
      tf.transaction = true;
      send_unacked(medium_, tf, [this, i](const Ppdu& p) {
        check_miss(i, p);
        arm_timeout(i);
      });
      return;
    }
    Ppdu cts;
    cts.source = kApId;
    cts.destination = kApId;
    cts.kind = FrameKind::CtsToSelf;
    cts.duration = t.cts;
    cts.nav = t.sifs + wur_airtime_ + config_.power.pcr_switch_on_delay + t.sifs + t.data + t.sifs + t.ack;
    cts.transaction = true;
    send_unacked(medium_, cts, [this, i, k, dest](const Ppdu&) {
      sim_.schedule_in(config_.timing.sifs, [this, i, k, dest] {
        Ppdu wur;
        wur.source = kApId;
        wur.destination = dest;
        wur.kind = FrameKind::Wur;
        wur.duration = wur_airtime_;
        wur.transaction = true;
        wur.wur_bits = wur_bits_[k];
        send_unacked(medium_, wur, [this, i](const Ppdu& p) {
          check_miss(i, p);
          arm_timeout(i);
        });
      });
    });
  }

  void check_miss(std::size_t i, const Ppdu& p) {
    const Frame& f = frames_[i];
    if (!p.corrupted && !f.ap_received && (f.ready_at == kTimeNever || f.ready_at > p.start)) ++misses_;
  }

  void arm_timeout(std::size_t i) {
    if (frames_[i].ap_received) return;
    ap_timeout_ = sim_.schedule_in(config_.effective_miss_timeout(), [this, i] {
      ap_timeout_armed_ = false;
      if (frames_[i].ap_received) return;
      cam_.on_outcome(ap_.edca(), rule_, false);
      ap_request();
    });
    ap_timeout_armed_ = true;
  }

  void ap_got_data(std::size_t i) {
    Frame& f = frames_[i];
    if (f.ap_received) return;
    f.ap_received = true;
    if (ap_current_ && *ap_current_ == i) {
      if (ap_timeout_armed_) {
        sim_.cancel(ap_timeout_);
        ap_timeout_armed_ = false;
      }
      cam_.cancel_access(ap_.edca());
      cam_.on_outcome(ap_.edca(), rule_, true);
      ap_current_.reset();
      ap_next();
    }
  }

  // ---- beacons --------------------------------------------------------------

  void beacon_due() {
    if (!beacon_pending_) {
      beacon_pending_ = true;
      cam_.request_access(ap_.beacon_edca());
    }
    sim_.schedule_in(config_.beacon_period, [this] { beacon_due(); });
  }

  void send_beacon() {
    beacon_pending_ = false;
    WurFrame frame;
    frame.type = WurFrameType::WurBeacon;
    frame.address = 0x001;
    frame.td_control = partial_timestamp(sim_.now());
    Ppdu wur;
    wur.source = kApId;
    wur.destination = kApId;
    wur.kind = FrameKind::Wur;
    wur.duration = ppdu_airtime(finalize(frame), config_.wur_rate).total;
    wur.transaction = true;
    wur.wur_bits = serialize_mac(finalize(frame));
    send_unacked(medium_, wur, [this](const Ppdu&) { cam_.on_outcome(ap_.beacon_edca(), OutcomeRule::WurUnacknowledged, true); });
  }

  // ---- accounting -------------------------------------------------------------

  void account_cluster(std::span<const Ppdu> cluster) {
    for (const Ppdu& p : cluster) {
      if (options_.keep_ppdu_log) ppdu_log_.push_back(p);
      if (!p.transaction) continue;
      channel_.add_transaction(p.start, p.end());
      if (!p.corrupted) continue;
      for (const Ppdu& q : cluster) {
        if (q.overlaps(p) || q.id == p.id) channel_.add_collision(q.start, q.end());
      }
    }
  }

  RunResult collect() {
    RunResult r;
    r.method = method_;
    r.sigma_s = to_seconds(sigma_);
    r.seed = seed_;
    r.frames_generated = frames_.size();
    r.frames_delivered = delivered_;
    r.misses = misses_;
    r.channel = channel_.breakdown();
    r.events = sim_.events_processed();
    r.simulated_time_s = to_seconds(sim_.now());

    double energy = 0.0;
    double delay = 0.0;
    for (const Frame& f : frames_) {
      r.trigger_attempts += f.record.trigger_attempts;
      if (!f.record.delivered()) continue;
      energy += f.record.energy_j;
      delay += to_seconds(f.record.delivered_at - f.record.target);
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.energy_per_frame_j = delivered_ > 0 ? energy / static_cast<double>(delivered_) : nan;
    r.delay_per_frame_s = delivered_ > 0 ? delay / static_cast<double>(delivered_) : nan;
    r.channel_time_per_frame_s = delivered_ > 0 ? channel_time_per_frame(channel_, delivered_) : nan;

    for (auto& s : sensors_) {
      r.sensor_energy_total_j += s.sta->ledger().energy_until(sim_.now());
      r.fcs_failures += s.sta->fcs_failures();
      if (options_.keep_ledger_history) r.ledger_segments.push_back(s.sta->ledger().segments(sim_.now()));
    }
    for (auto& sat : saturated_) {
      r.saturated_successes += sat->successes();
      r.saturated_failures += sat->failures();
    }
    if (options_.keep_frames) {
      r.frames.reserve(frames_.size());
      for (const Frame& f : frames_) r.frames.push_back(f.record);
    }
    r.ppdu_log = std::move(ppdu_log_);
    r.reservations = std::move(reservations_);
    return r;
  }

  const ScenarioConfig& config_;
  MethodKind method_;
  Duration sigma_;
  std::uint64_t seed_;
  RunOptions options_;

  Simulator sim_;
  Medium medium_;
  ChannelAccessManager cam_;
  AccessPoint ap_;
  ChannelLedger channel_;
  TwtSchedule schedule_;
  Duration guard_;
  OutcomeRule rule_;
  Duration wur_airtime_{0};

  std::vector<std::unique_ptr<SaturatedSta>> saturated_;
  std::vector<Sensor> sensors_;
  std::vector<Frame> frames_;
  std::vector<GroupState> groups_;
  std::vector<Bits> wur_bits_;

  std::deque<std::size_t> ap_queue_;
  std::optional<std::size_t> ap_current_;
  EventHandle ap_timeout_{};
  bool ap_timeout_armed_ = false;
  bool beacon_pending_ = false;

  std::size_t delivered_ = 0;
  std::uint64_t misses_ = 0;
  std::vector<Ppdu> ppdu_log_;
  std::vector<TimeInterval> reservations_;
};

}  // namespace

RunResult run_method(const ScenarioConfig& config, MethodKind method, Duration sigma, std::uint64_t seed,
                     const RunOptions& options) {
  config.validate();
  ScenarioRun run(config, method, sigma, seed, options);
  return run.execute();
}

}  // namespace wurba
