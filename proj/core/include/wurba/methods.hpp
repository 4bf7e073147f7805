#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "wurba/metrics.hpp"
#include "wurba/phy_channel.hpp"
#include "wurba/scenario.hpp"

namespace wurba {

/// Target times for one run.
struct TwtSchedule {
  struct Slot {
    std::uint32_t sensor = 0;
    std::uint32_t round = 0;
    SimTime target{0};
  };
  /// Guard-interval group: sensors served back to back inside one
  /// reservation starting guard before the first target.
  struct Group {
    SimTime reservation_start{0};
    SimTime first_target{0};
    SimTime last_target{0};
    std::vector<std::size_t> slots;
  };

  std::vector<Slot> slots;  // ascending target order
  std::vector<Group> groups;  // TwtGuard only
  /// Distance between consecutive targets (inside a group for TwtGuard).
  Duration spacing{0};
  SimTime last_target{0};
};

/// Builds the per-sensor targets. Methods 1, 2 and 4 space consecutive
/// targets by at least 2 * guard + DATA exchange so drift windows never
/// overlap; TwtGuard packs each round into one group with slots 2 * DATA
/// apart. Throws ConfigError when an explicit target gap is too short.
TwtSchedule build_schedule(const ScenarioConfig& config, MethodKind method, Duration sigma);

struct FrameRecord {
  std::uint32_t sensor = 0;
  std::uint32_t round = 0;
  SimTime target{0};
  SimTime window_start = kTimeNever;
  SimTime delivered_at = kTimeNever;
  double energy_j = 0.0;
  std::uint32_t data_attempts = 0;
  std::uint32_t trigger_attempts = 0;
  /// Backoff counter of the first contention for this frame (sensor's for
  /// methods 1/3, AP's for methods 2/4), or -1 when no contention happened.
  std::int32_t first_backoff = -1;
  bool delivered() const { return delivered_at != kTimeNever; }
};

struct RunOptions {
  bool keep_frames = false;
  bool keep_ppdu_log = false;
  bool keep_ledger_history = false;
  std::ostream* trace = nullptr;
};

struct RunResult {
  MethodKind method = MethodKind::TwtPlain;
  double sigma_s = 0.0;
  std::uint64_t seed = 0;

  std::uint64_t frames_generated = 0;
  std::uint64_t frames_delivered = 0;
  /// TF / wake-up frames that went out intact before the addressed sensor's
  /// radio was on.
  std::uint64_t misses = 0;
  std::uint64_t trigger_attempts = 0;

  double energy_per_frame_j = 0.0;
  double channel_time_per_frame_s = 0.0;
  double delay_per_frame_s = 0.0;
  ChannelBreakdown channel;

  double sensor_energy_total_j = 0.0;
  double simulated_time_s = 0.0;
  std::uint64_t events = 0;
  std::uint64_t saturated_successes = 0;
  std::uint64_t saturated_failures = 0;
  std::uint64_t fcs_failures = 0;

  std::vector<FrameRecord> frames;
  std::vector<Ppdu> ppdu_log;
  std::vector<TimeInterval> reservations;
  std::vector<std::vector<EnergyLedger::Segment>> ledger_segments;
};

RunResult run_method(const ScenarioConfig& config, MethodKind method, Duration sigma, std::uint64_t seed,
                     const RunOptions& options = {});

inline RunResult run_twt_plain(const ScenarioConfig& c, Duration sigma, std::uint64_t seed, const RunOptions& o = {}) {
  return run_method(c, MethodKind::TwtPlain, sigma, seed, o);
}
inline RunResult run_twt_tf(const ScenarioConfig& c, Duration sigma, std::uint64_t seed, const RunOptions& o = {}) {
  return run_method(c, MethodKind::TwtWithTf, sigma, seed, o);
}
inline RunResult run_twt_guard(const ScenarioConfig& c, Duration sigma, std::uint64_t seed, const RunOptions& o = {}) {
  return run_method(c, MethodKind::TwtGuard, sigma, seed, o);
}
inline RunResult run_wur_cts(const ScenarioConfig& c, Duration sigma, std::uint64_t seed, const RunOptions& o = {}) {
  return run_method(c, MethodKind::WurCts, sigma, seed, o);
}

}  // namespace wurba
