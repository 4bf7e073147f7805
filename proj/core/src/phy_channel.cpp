#include "wurba/phy_channel.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace wurba {

std::string_view to_string(FrameKind kind) {
  switch (kind) {
    case FrameKind::Data: return "DATA";
    case FrameKind::Ack: return "ACK";
    case FrameKind::CtsToSelf: return "CTS";
    case FrameKind::Trigger: return "TF";
    case FrameKind::PsPoll: return "PSPOLL";
    case FrameKind::Wur: return "WUR";
  }
  return "?";
}

void Medium::attach(RadioNode& node) {
  nodes_.push_back(&node);
  ensure_station(node.station_id());
}

void Medium::ensure_station(StationId station) {
  if (station >= nav_.size()) {
    nav_.resize(station + 1, SimTime{0});
  }
}

bool Medium::is_transmitting(StationId station) const {
  const SimTime now = sim_.now();
  return std::any_of(active_.begin(), active_.end(),
                     [&](const Active& a) { return a.ppdu.source == station && a.ppdu.end() > now; });
}

std::uint64_t Medium::begin_tx(Ppdu ppdu, EndCallback on_end) {
  if (ppdu.duration.count() <= 0) {
    throw ModelError("PPDU duration must be positive");
  }
  if (is_transmitting(ppdu.source)) {
    throw ModelError(fmt::format("station {} starts a second transmission", ppdu.source));
  }
  const SimTime now = sim_.now();
  ppdu.id = next_id_++;
  ppdu.start = now;
  ppdu.corrupted = false;

  if (active_.empty()) {
    if (observer_ != nullptr) {
      observer_->on_busy(now);
    }
    busy_since_ = now;
  }
  for (auto& a : active_) {
    if (a.ppdu.overlaps(ppdu)) {
      if (!a.ppdu.corrupted) ++corrupted_count_;
      if (!ppdu.corrupted) ++corrupted_count_;
      a.ppdu.corrupted = true;
      ppdu.corrupted = true;
      if (trace_ != nullptr) {
        *trace_ << fmt::format("{} CORRUPT id={} with={}\n", now.count(), ppdu.id, a.ppdu.id);
      }
    }
  }
  if (trace_ != nullptr) {
    *trace_ << fmt::format("{} BEGIN id={} src={} dst={} kind={} dur_ns={} nav_ns={}\n", now.count(), ppdu.id,
                           ppdu.source, ppdu.destination, to_string(ppdu.kind), ppdu.duration.count(),
                           ppdu.nav.count());
  }
  const std::uint64_t id = ppdu.id;
  const SimTime end = ppdu.end();
  active_.push_back(Active{std::move(ppdu), std::move(on_end)});
  sim_.schedule(end, [this, id] { end_tx(id); });
  return id;
}

void Medium::end_tx(std::uint64_t id) {
  const auto it = std::find_if(active_.begin(), active_.end(), [id](const Active& a) { return a.ppdu.id == id; });
  if (it == active_.end()) {
    throw ModelError("end of unknown PPDU");
  }
  Active done = std::move(*it);
  active_.erase(it);
  const SimTime now = sim_.now();
  const Ppdu& ppdu = done.ppdu;
  if (active_.empty()) {
    idle_since_ = now;
    busy_time_ += now - busy_since_;
  }
  if (trace_ != nullptr) {
    *trace_ << fmt::format("{} END id={} corrupted={}\n", now.count(), ppdu.id, ppdu.corrupted ? 1 : 0);
  }

  if (!ppdu.corrupted) {
    for (RadioNode* node : nodes_) {
      if (node->station_id() == ppdu.source || !node->can_receive(ppdu)) {
        continue;
      }
      if (classify(ppdu.kind) != PpduClass::Wur && ppdu.nav.count() > 0 &&
          node->station_id() != ppdu.destination) {
        set_nav(node->station_id(), now + ppdu.nav);
      }
      node->receive(ppdu);
    }
  }
  cluster_.push_back(ppdu);
  if (done.on_end) {
    done.on_end(ppdu);
  }
  if (active_.empty()) {
    if (cluster_sink_) {
      cluster_sink_(cluster_);
    }
    cluster_.clear();
    if (observer_ != nullptr) {
      observer_->on_idle(now);
    }
  }
}

void Medium::flush_cluster() {
  std::vector<Ppdu> period = cluster_;
  for (const auto& a : active_) {
    period.push_back(a.ppdu);
  }
  if (cluster_sink_ && !period.empty()) {
    cluster_sink_(period);
  }
  cluster_.clear();
}

CcaState Medium::cca(StationId station, SimTime t) const {
  for (const auto& a : active_) {
    if (a.ppdu.start <= t && t < a.ppdu.end()) {
      return CcaState::Busy;
    }
  }
  return nav_expiry(station) > t ? CcaState::Busy : CcaState::Idle;
}

void Medium::set_nav(StationId station, SimTime until) {
  ensure_station(station);
  if (until > nav_[station]) {
    nav_[station] = until;
    if (observer_ != nullptr) {
      observer_->on_nav_changed(station, sim_.now());
    }
  }
}

void Medium::reset_nav(StationId station, SimTime until) {
  ensure_station(station);
  nav_[station] = until;
  if (observer_ != nullptr) {
    observer_->on_nav_changed(station, sim_.now());
  }
}

SimTime Medium::nav_expiry(StationId station) const {
  return station < nav_.size() ? nav_[station] : SimTime{0};
}

}  // namespace wurba
