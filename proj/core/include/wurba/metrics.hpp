#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wurba/time.hpp"

namespace wurba {

enum class PcrState : std::uint8_t { Doze, SwitchingOn, Listening, Transmitting };
enum class WurState : std::uint8_t { Off, On };

/// Power draw in milliwatts for every radio state.
struct PowerTable {
  std::array<double, 4> pcr_mw{};  // indexed by PcrState
  std::array<double, 2> wur_mw{};  // indexed by WurState

  double total_mw(PcrState pcr, WurState wur) const {
    return pcr_mw[static_cast<std::size_t>(pcr)] + wur_mw[static_cast<std::size_t>(wur)];
  }
};

/// Joules drawn at `mw` milliwatts for `d`.
inline double energy_joules(double mw, Duration d) { return mw * 1e-3 * to_seconds(d); }

/// Piecewise-constant power timeline of one sensor. Every instant after
/// the start carries exactly one PCR state and one WUR state.
class EnergyLedger {
public:
  struct Segment {
    SimTime start;
    SimTime end;
    PcrState pcr;
    WurState wur;
  };

  EnergyLedger(PowerTable power, SimTime start, PcrState pcr, WurState wur, bool keep_history = false);

  void transition(SimTime t, PcrState pcr, WurState wur);

  PcrState pcr() const { return pcr_; }
  WurState wur() const { return wur_; }
  SimTime last_change() const { return since_; }
  const PowerTable& power() const { return power_; }

  /// Energy from the ledger start to t (t >= last_change()).
  double energy_until(SimTime t) const;
  /// Energy over [a, b]; needs the history unless a >= last_change().
  double energy_between(SimTime a, SimTime b) const;

  /// Closed segments so far plus the open one up to `t`.
  std::vector<Segment> segments(SimTime t) const;
  bool keeps_history() const { return keep_history_; }

private:
  PowerTable power_;
  SimTime origin_;
  SimTime since_;
  PcrState pcr_;
  WurState wur_;
  double accumulated_ = 0.0;
  bool keep_history_;
  std::vector<Segment> history_;
};

/// Energy spent on one delivered frame: the ledger between the wake-up
/// instant and the end of the ACK.
double energy_per_frame(const EnergyLedger& ledger, SimTime window_start, SimTime window_end);

struct TimeInterval {
  SimTime start;
  SimTime end;
  Duration length() const { return end - start; }
};

/// Sorts and merges intervals whose gap is <= bridge; returns the union.
std::vector<TimeInterval> merge_intervals(std::vector<TimeInterval> intervals, Duration bridge = Duration{0});
Duration measure(std::span<const TimeInterval> merged);

struct ChannelBreakdown {
  Duration reserved{0};
  Duration transaction{0};
  Duration collision{0};
  Duration total{0};
};

/// Channel time attributable to sensors: transaction PPDUs (with gaps up to
/// `bridge` inside an exchange sequence counted), the full extent of
/// collisions involving them, and reserved intervals. Overlaps are counted
/// once; components are attributed reserved > transaction > collision.
class ChannelLedger {
public:
  explicit ChannelLedger(Duration bridge = Duration{0}) : bridge_(bridge) {}

  void add_transaction(SimTime start, SimTime end) { append(transaction_, {start, end}, bridge_); }
  void add_collision(SimTime start, SimTime end) { append(collision_, {start, end}, Duration{0}); }
  void add_reserved(SimTime start, SimTime end) { append(reserved_, {start, end}, Duration{0}); }

  ChannelBreakdown breakdown() const;

  const std::vector<TimeInterval>& reserved() const { return reserved_; }
  const std::vector<TimeInterval>& transactions() const { return transaction_; }
  const std::vector<TimeInterval>& collisions() const { return collision_; }

private:
  static void append(std::vector<TimeInterval>& list, TimeInterval next, Duration bridge);

  Duration bridge_;
  std::vector<TimeInterval> transaction_;
  std::vector<TimeInterval> collision_;
  std::vector<TimeInterval> reserved_;
};

/// Total channel time divided by delivered frames. Throws
/// std::domain_error when nothing was delivered.
double channel_time_per_frame(const ChannelLedger& ledger, std::uint64_t delivered);

struct MetricStats {
  double mean = 0.0;
  double sd = 0.0;
  /// 95% Student-t half-width over replication means; empty with fewer
  /// than two replications.
  std::optional<double> ci95;
  std::size_t count = 0;
};

/// Summary of one metric across replications.
MetricStats summarize(std::span<const double> replication_values);

/// Two-sided 95% Student-t critical value.
double student_t_975(std::size_t degrees_of_freedom);

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double slope_ci95 = 0.0;  // half-width
  bool slope_ci_contains_zero() const { return slope - slope_ci95 <= 0.0 && 0.0 <= slope + slope_ci95; }
};

/// Ordinary least squares y = intercept + slope * x with a t-based CI.
RegressionFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace wurba
