#include "wurba/sim_kernel.hpp"

#include <cmath>
#include <numbers>

namespace wurba {

EventHandle Simulator::schedule(SimTime at, Action action) {
  if (at < now_) {
    throw ConfigError("event scheduled in the past (" + std::to_string(at.count()) + " ns < now " +
                      std::to_string(now_.count()) + " ns)");
  }
  const std::uint64_t seq = next_sequence_++;
  queue_.push(Entry{at, seq, std::move(action)});
  return EventHandle{seq};
}

void Simulator::cancel(EventHandle handle) {
  if (handle.valid() && handle.sequence < next_sequence_) {
    cancelled_.insert(handle.sequence);
  }
}

bool Simulator::pop_next(SimTime limit, Entry& out) {
  while (!queue_.empty()) {
    const Entry& top = queue_.top();
    if (top.time > limit) {
      return false;
    }
    if (auto it = cancelled_.find(top.sequence); it != cancelled_.end()) {
      cancelled_.erase(it);
      queue_.pop();
      continue;
    }
    // priority_queue::top is const; the action is moved out before pop.
    out = std::move(const_cast<Entry&>(top));
    queue_.pop();
    return true;
  }
  return false;
}

std::size_t Simulator::run_until(SimTime t_end) {
  if (t_end < now_) {
    throw ConfigError("run_until horizon lies in the past");
  }
  stopped_ = false;
  std::size_t count = 0;
  Entry entry;
  while (!stopped_ && pop_next(t_end, entry)) {
    now_ = entry.time;
    entry.action();
    ++count;
    ++processed_;
  }
  if (!stopped_) {
    now_ = t_end;
  }
  return count;
}

std::size_t Simulator::run() {
  stopped_ = false;
  std::size_t count = 0;
  Entry entry;
  while (!stopped_ && pop_next(kTimeNever, entry)) {
    now_ = entry.time;
    entry.action();
    ++count;
    ++processed_;
  }
  return count;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(mix64(seed ^ mix64(stream_id + 0x5eed))) {}

double RngStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_int(std::uint64_t upper) {
  if (upper == std::numeric_limits<std::uint64_t>::max()) {
    return engine_();
  }
  const std::uint64_t range = upper + 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return draw % range;
}

double RngStream::standard_normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Duration sample_normal(RngStream& stream, Duration mean, Duration sigma) {
  if (sigma.count() < 0) {
    throw ConfigError("sigma", "standard deviation must be non-negative");
  }
  if (sigma.count() == 0) {
    return mean;
  }
  const double shift = static_cast<double>(sigma.count()) * stream.standard_normal();
  return mean + Duration{std::llround(shift)};
}

}  // namespace wurba
