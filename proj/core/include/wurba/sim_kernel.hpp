#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "wurba/time.hpp"

namespace wurba {

/// Raised for invalid model parameters or misuse of the engine.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  explicit ConfigError(const std::string& message) : ConfigError("", message) {}

  const std::string& key() const { return key_; }

private:
  std::string key_;
};

/// Raised when the simulated system reaches a state the model forbids.
class ModelError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

struct EventHandle {
  std::uint64_t sequence = 0;
  bool valid() const { return sequence != 0; }
};

/// Deterministic discrete-event engine. Events fire in (time, sequence)
/// order; sequence numbers follow scheduling order.
class Simulator {
public:
  using Action = std::function<void()>;

  SimTime now() const { return now_; }

  EventHandle schedule(SimTime at, Action action);
  EventHandle schedule_in(Duration delay, Action action) { return schedule(now_ + delay, std::move(action)); }
  void cancel(EventHandle handle);

  /// Processes every event with fire time <= t_end. Returns the number of
  /// events executed. Leaves the clock at t_end.
  std::size_t run_until(SimTime t_end);

  /// Runs until the queue drains or stop() is called.
  std::size_t run();
  void stop() { stopped_ = true; }

  /// Queue length, including cancelled entries not yet discarded.
  std::size_t queued() const { return queue_.size(); }
  std::uint64_t events_processed() const { return processed_; }

private:
  struct Entry {
    SimTime time;
    std::uint64_t sequence;
    Action action;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      return a.time != b.time ? a.time > b.time : a.sequence > b.sequence;
    }
  };

  bool pop_next(SimTime limit, Entry& out);

  SimTime now_{0};
  std::uint64_t next_sequence_ = 1;
  std::uint64_t processed_ = 0;
  bool stopped_ = false;
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  std::unordered_set<std::uint64_t> cancelled_;
};

/// SplitMix64 finaliser; also used to expand seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent random stream identified by (seed, stream id).
///
/// Built on std::mt19937_64, whose output sequence is fixed by the standard.
/// The derived distributions below are implemented here rather than taken
/// from <random> so results do not depend on the standard library vendor.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform integer on [0, upper] inclusive, unbiased.
  std::uint64_t uniform_int(std::uint64_t upper);
  /// Standard normal via Box-Muller (no cached second variate).
  double standard_normal();

private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// mean + sigma * Z, rounded to the nearest nanosecond. sigma == 0 returns
/// mean exactly and consumes no randomness.
Duration sample_normal(RngStream& stream, Duration mean, Duration sigma);

/// Stream purposes; a station's stream id is station * kStreamsPerStation + purpose.
enum class StreamPurpose : std::uint64_t { Drift = 0, Backoff = 1, Misc = 2 };
inline constexpr std::uint64_t kStreamsPerStation = 4;

constexpr std::uint64_t stream_id_for(std::uint32_t station, StreamPurpose purpose) {
  return station * kStreamsPerStation + static_cast<std::uint64_t>(purpose);
}

}  // namespace wurba
