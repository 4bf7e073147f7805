#include "wurba/mac_edca.hpp"

#include <algorithm>
#include <bit>
#include <memory>

namespace wurba {

void EdcaParams::validate() const {
  auto mersenne = [](std::uint32_t v) { return std::has_single_bit(static_cast<std::uint64_t>(v) + 1); };
  if (!mersenne(cw_min)) throw ConfigError("cw_min", "cw_min + 1 must be a power of two");
  if (!mersenne(cw_max)) throw ConfigError("cw_max", "cw_max + 1 must be a power of two");
  if (cw_min > cw_max) throw ConfigError("cw_min", "cw_min exceeds cw_max");
  if (slot.count() <= 0) throw ConfigError("slot_us", "slot must be positive");
  if (sifs.count() <= 0) throw ConfigError("sifs_us", "SIFS must be positive");
}

EdcaEntity::EdcaEntity(StationId owner, EdcaParams params, RngStream rng)
    : owner_(owner), params_(params), rng_(std::move(rng)), cw_(params.cw_min) {
  params_.validate();
}

void EdcaEntity::reset_window() {
  cw_ = params_.cw_min;
  retry_count_ = 0;
  needs_draw_ = true;
}

ChannelAccessManager::ChannelAccessManager(Simulator& sim, Medium& medium) : sim_(sim), medium_(medium) {
  medium_.set_observer(this);
}

ChannelAccessManager::~ChannelAccessManager() { medium_.set_observer(nullptr); }

void ChannelAccessManager::request_access(EdcaEntity& entity) {
  if (entity.needs_draw_) {
    entity.backoff_ = static_cast<std::uint32_t>(entity.rng_.uniform_int(entity.cw_));
    entity.last_draw_ = entity.backoff_;
    entity.needs_draw_ = false;
  }
  entity.contention_start_ = sim_.now();
  entity.state_ = medium_.physically_busy() ? EdcaState::Deferring : EdcaState::BackingOff;
  if (std::find(contenders_.begin(), contenders_.end(), &entity) == contenders_.end()) {
    contenders_.push_back(&entity);
  }
  reschedule();
}

void ChannelAccessManager::cancel_access(EdcaEntity& entity) {
  if (medium_.physically_busy() == false) {
    settle(entity, sim_.now());
  }
  std::erase(contenders_, &entity);
  entity.state_ = EdcaState::Idle;
  reschedule();
}

void ChannelAccessManager::on_outcome(EdcaEntity& entity, OutcomeRule rule, bool success) {
  if (rule == OutcomeRule::Acknowledged) {
    if (success) {
      entity.cw_ = entity.params_.cw_min;
      entity.retry_count_ = 0;
    } else {
      entity.cw_ = std::min(2 * entity.cw_ + 1, entity.params_.cw_max);
      ++entity.retry_count_;
    }
  }
  entity.needs_draw_ = true;
  if (entity.state_ == EdcaState::Transmitting) {
    entity.state_ = EdcaState::Idle;
  }
}

void ChannelAccessManager::block(EdcaEntity& entity) {
  settle(entity, sim_.now());
  entity.blocked_until_ = kTimeNever;
  reschedule();
}

void ChannelAccessManager::release(EdcaEntity& entity) {
  entity.blocked_until_ = sim_.now();
  reschedule();
}

SimTime ChannelAccessManager::idle_reference(const EdcaEntity& entity) const {
  return std::max({medium_.idle_since(), entity.contention_start_, medium_.nav_expiry(entity.owner_),
                   entity.blocked_until_});
}

SimTime ChannelAccessManager::grant_time(const EdcaEntity& entity) const {
  if (medium_.physically_busy()) {
    return kTimeNever;
  }
  const SimTime ref = idle_reference(entity);
  if (ref == kTimeNever) {
    return kTimeNever;
  }
  return ref + entity.params_.aifs() + entity.params_.slot * static_cast<std::int64_t>(entity.backoff_);
}

void ChannelAccessManager::settle(EdcaEntity& entity, SimTime t) {
  if (entity.state_ != EdcaState::BackingOff && entity.state_ != EdcaState::Deferring) {
    return;
  }
  if (medium_.physically_busy()) {
    return;
  }
  const SimTime ref = idle_reference(entity);
  if (ref == kTimeNever) {
    return;
  }
  const SimTime counting_from = ref + entity.params_.aifs();
  if (t < counting_from) {
    return;
  }
  const auto slots = static_cast<std::uint64_t>((t - counting_from) / entity.params_.slot);
  entity.backoff_ -= static_cast<std::uint32_t>(std::min<std::uint64_t>(slots, entity.backoff_));
}

void ChannelAccessManager::on_busy(SimTime t) {
  for (EdcaEntity* e : contenders_) {
    settle(*e, t);
    e->state_ = EdcaState::Deferring;
  }
  if (pending_event_.valid()) {
    sim_.cancel(pending_event_);
    pending_event_ = {};
    pending_time_ = kTimeNever;
  }
}

void ChannelAccessManager::on_idle(SimTime) { reschedule(); }

void ChannelAccessManager::on_nav_changed(StationId, SimTime) {
  if (!medium_.physically_busy()) {
    reschedule();
  }
}

void ChannelAccessManager::reschedule() {
  SimTime earliest = kTimeNever;
  for (EdcaEntity* e : contenders_) {
    e->grant_time_ = grant_time(*e);
    if (e->grant_time_ != kTimeNever) {
      e->state_ = (medium_.nav_expiry(e->owner_) > sim_.now() || e->blocked_until_ > sim_.now())
                      ? EdcaState::Deferring
                      : EdcaState::BackingOff;
    }
    earliest = std::min(earliest, e->grant_time_);
  }
  if (earliest == pending_time_ && pending_event_.valid()) {
    return;
  }
  if (pending_event_.valid()) {
    sim_.cancel(pending_event_);
    pending_event_ = {};
  }
  pending_time_ = earliest;
  if (earliest != kTimeNever) {
    pending_event_ = sim_.schedule(earliest, [this] { fire(); });
  }
}

void ChannelAccessManager::fire() {
  pending_event_ = {};
  pending_time_ = kTimeNever;
  const SimTime now = sim_.now();
  std::vector<EdcaEntity*> granted;
  for (EdcaEntity* e : contenders_) {
    if (grant_time(*e) == now) {
      granted.push_back(e);
    }
  }
  for (EdcaEntity* e : granted) {
    std::erase(contenders_, e);
    e->backoff_ = 0;
    e->state_ = EdcaState::Transmitting;
    e->grant_time_ = kTimeNever;
  }
  for (EdcaEntity* e : granted) {
    if (e->on_grant) {
      e->on_grant();
    }
  }
  if (!medium_.physically_busy()) {
    reschedule();
  }
}

void exchange_data_ack(Simulator& sim, Medium& medium, const ExchangeTiming& timing, StationId sender,
                       StationId receiver, bool transaction, ExchangeHooks hooks) {
  Ppdu data;
  data.source = sender;
  data.destination = receiver;
  data.kind = FrameKind::Data;
  data.duration = timing.data;
  data.nav = timing.sifs + timing.ack;
  data.transaction = transaction;

  auto shared = std::make_shared<ExchangeHooks>(std::move(hooks));
  medium.begin_tx(std::move(data), [&sim, &medium, timing, sender, receiver, transaction,
                                    shared](const Ppdu& ended) {
    if (shared->data_ended) {
      shared->data_ended(ended);
    }
    const std::uint64_t data_id = ended.id;
    if (ended.corrupted) {
      const SimTime timeout = ended.end() + timing.sifs + timing.ack;
      sim.schedule(timeout, [shared, timeout, data_id] {
        if (shared->completed) shared->completed(ExchangeResult{false, timeout, data_id});
      });
      return;
    }
    sim.schedule_in(timing.sifs, [&medium, timing, sender, receiver, transaction, shared, data_id] {
      Ppdu ack;
      ack.source = receiver;
      ack.destination = sender;
      ack.kind = FrameKind::Ack;
      ack.duration = timing.ack;
      ack.transaction = transaction;
      medium.begin_tx(std::move(ack), [shared, data_id](const Ppdu& ack_done) {
        if (shared->completed) shared->completed(ExchangeResult{!ack_done.corrupted, ack_done.end(), data_id});
      });
    });
  });
}

std::uint64_t send_unacked(Medium& medium, Ppdu ppdu, Medium::EndCallback on_end) {
  return medium.begin_tx(std::move(ppdu), std::move(on_end));
}

}  // namespace wurba
