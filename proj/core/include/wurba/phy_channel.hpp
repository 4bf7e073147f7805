#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "wurba/sim_kernel.hpp"
#include "wurba/wur_codec.hpp"

namespace wurba {

using StationId = std::uint32_t;

enum class FrameKind : std::uint8_t { Data, Ack, CtsToSelf, Trigger, PsPoll, Wur };

/// LegacyData, LegacyControl (ACK/CTS/TF/PS-Poll) or a WUR PPDU.
enum class PpduClass : std::uint8_t { LegacyData, LegacyControl, Wur };

constexpr PpduClass classify(FrameKind kind) {
  switch (kind) {
    case FrameKind::Data: return PpduClass::LegacyData;
    case FrameKind::Wur: return PpduClass::Wur;
    default: return PpduClass::LegacyControl;
  }
}

std::string_view to_string(FrameKind kind);

struct Ppdu {
  std::uint64_t id = 0;  // assigned by Medium::begin_tx
  StationId source = 0;
  StationId destination = 0;
  FrameKind kind = FrameKind::Data;
  SimTime start{0};  // assigned by Medium::begin_tx
  Duration duration{0};
  /// Duration field: virtual busy time after the end of this PPDU.
  Duration nav{0};
  bool corrupted = false;
  /// Part of a sensor transaction (counted as sensor channel time).
  bool transaction = false;
  std::optional<Bits> wur_bits;  // serialized WUR MAC frame for Wur PPDUs

  SimTime end() const { return start + duration; }
  bool overlaps(const Ppdu& other) const { return start < other.end() && other.start < end(); }
};

/// A station attached to the medium.
class RadioNode {
public:
  virtual ~RadioNode() = default;
  virtual StationId station_id() const = 0;
  /// True when the receiver relevant for this PPDU (PCR for legacy, WUR for
  /// WUR PPDUs) has been on continuously since ppdu.start.
  virtual bool can_receive(const Ppdu& ppdu) const = 0;
  virtual void receive(const Ppdu& ppdu) = 0;
};

class MediumObserver {
public:
  virtual ~MediumObserver() = default;
  /// Called before a PPDU joins an idle medium.
  virtual void on_busy(SimTime t) = 0;
  /// Called once all end-of-PPDU processing left the medium idle.
  virtual void on_idle(SimTime t) = 0;
  /// Called when a station's virtual carrier sense changed.
  virtual void on_nav_changed(StationId station, SimTime t) = 0;
};

enum class CcaState : std::uint8_t { Idle, Busy };

/// Single collision domain with zero propagation delay and no capture: any
/// two PPDUs whose half-open intervals intersect are both corrupted.
class Medium {
public:
  using EndCallback = std::function<void(const Ppdu&)>;
  using ClusterSink = std::function<void(std::span<const Ppdu>)>;

  explicit Medium(Simulator& sim) : sim_(sim) {}
  Medium(const Medium&) = delete;
  Medium& operator=(const Medium&) = delete;

  void attach(RadioNode& node);
  void set_observer(MediumObserver* observer) { observer_ = observer; }
  /// Receives every PPDU of a busy period once the medium goes idle again.
  void set_cluster_sink(ClusterSink sink) { cluster_sink_ = std::move(sink); }
  void set_trace(std::ostream* trace) { trace_ = trace; }

  /// Starts a transmission at now(). Throws ModelError if the source is
  /// already transmitting. on_end runs after delivery at the PPDU end.
  std::uint64_t begin_tx(Ppdu ppdu, EndCallback on_end = {});

  CcaState cca(StationId station, SimTime t) const;
  bool physically_busy() const { return !active_.empty(); }
  /// Instant the medium last became idle (meaningful while idle).
  SimTime idle_since() const { return idle_since_; }
  bool is_transmitting(StationId station) const;

  /// NAV expiry = max(current, until). Dozing stations are never updated
  /// through delivery; callers decide who decoded the frame.
  void set_nav(StationId station, SimTime until);
  /// Explicit override, the only way a NAV expiry can decrease.
  void reset_nav(StationId station, SimTime until);
  SimTime nav_expiry(StationId station) const;

  /// Hands the current busy period (ended and still active PPDUs) to the
  /// cluster sink early, e.g. when a run stops mid-period.
  void flush_cluster();

  std::uint64_t ppdus_started() const { return next_id_ - 1; }
  std::uint64_t ppdus_corrupted() const { return corrupted_count_; }
  Duration busy_time() const { return busy_time_; }

private:
  struct Active {
    Ppdu ppdu;
    EndCallback on_end;
  };

  void end_tx(std::uint64_t id);
  void ensure_station(StationId station);

  Simulator& sim_;
  MediumObserver* observer_ = nullptr;
  ClusterSink cluster_sink_;
  std::ostream* trace_ = nullptr;
  std::vector<RadioNode*> nodes_;
  std::vector<Active> active_;
  std::vector<Ppdu> cluster_;
  std::vector<SimTime> nav_;
  SimTime idle_since_{0};
  SimTime busy_since_{0};
  Duration busy_time_{0};
  std::uint64_t next_id_ = 1;
  std::uint64_t corrupted_count_ = 0;
};

}  // namespace wurba
