#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>

namespace wurba {

/// Simulated durations and instants are integer nanoseconds. Instants are
/// measured from the start of the run.
using Duration = std::chrono::nanoseconds;
using SimTime = std::chrono::nanoseconds;

inline constexpr SimTime kTimeNever{std::numeric_limits<std::int64_t>::max()};

constexpr Duration microseconds(std::int64_t us) { return Duration{us * 1000}; }
constexpr Duration milliseconds(std::int64_t ms) { return Duration{ms * 1000000}; }

/// Rounds to the nearest nanosecond.
inline Duration from_seconds(double s) { return Duration{std::llround(s * 1e9)}; }
inline Duration from_microseconds(double us) { return Duration{std::llround(us * 1e3)}; }

constexpr double to_seconds(Duration d) { return static_cast<double>(d.count()) * 1e-9; }
constexpr double to_microseconds(Duration d) { return static_cast<double>(d.count()) * 1e-3; }

}  // namespace wurba
