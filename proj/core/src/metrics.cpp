#include "wurba/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace wurba {

EnergyLedger::EnergyLedger(PowerTable power, SimTime start, PcrState pcr, WurState wur, bool keep_history)
    : power_(power), origin_(start), since_(start), pcr_(pcr), wur_(wur), keep_history_(keep_history) {}

void EnergyLedger::transition(SimTime t, PcrState pcr, WurState wur) {
  if (t < since_) {
    throw std::logic_error("energy ledger transition goes back in time");
  }
  accumulated_ += energy_joules(power_.total_mw(pcr_, wur_), t - since_);
  if (keep_history_ && t > since_) {
    history_.push_back(Segment{since_, t, pcr_, wur_});
  }
  since_ = t;
  pcr_ = pcr;
  wur_ = wur;
}

double EnergyLedger::energy_until(SimTime t) const {
  if (t < since_) {
    throw std::logic_error("energy_until before the last transition");
  }
  return accumulated_ + energy_joules(power_.total_mw(pcr_, wur_), t - since_);
}

double EnergyLedger::energy_between(SimTime a, SimTime b) const {
  if (b < a) {
    throw std::invalid_argument("energy window ends before it starts");
  }
  if (a >= since_) {
    return energy_joules(power_.total_mw(pcr_, wur_), b - a);
  }
  if (!keep_history_) {
    throw std::logic_error("energy_between into the past needs ledger history");
  }
  double total = 0.0;
  for (const auto& s : segments(std::max(b, since_))) {
    const SimTime lo = std::max(a, s.start);
    const SimTime hi = std::min(b, s.end);
    if (hi > lo) {
      total += energy_joules(power_.total_mw(s.pcr, s.wur), hi - lo);
    }
  }
  return total;
}

std::vector<EnergyLedger::Segment> EnergyLedger::segments(SimTime t) const {
  std::vector<Segment> out = history_;
  if (t > since_) {
    out.push_back(Segment{since_, t, pcr_, wur_});
  }
  return out;
}

double energy_per_frame(const EnergyLedger& ledger, SimTime window_start, SimTime window_end) {
  return ledger.energy_between(window_start, window_end);
}

std::vector<TimeInterval> merge_intervals(std::vector<TimeInterval> intervals, Duration bridge) {
  std::sort(intervals.begin(), intervals.end(),
            [](const TimeInterval& a, const TimeInterval& b) { return a.start < b.start; });
  std::vector<TimeInterval> out;
  for (const auto& iv : intervals) {
    if (iv.end <= iv.start) continue;
    if (!out.empty() && iv.start <= out.back().end + bridge) {
      out.back().end = std::max(out.back().end, iv.end);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

Duration measure(std::span<const TimeInterval> merged) {
  Duration total{0};
  for (const auto& iv : merged) total += iv.length();
  return total;
}

void ChannelLedger::append(std::vector<TimeInterval>& list, TimeInterval next, Duration bridge) {
  if (next.end <= next.start) return;
  auto first = std::upper_bound(list.begin(), list.end(), next.start,
                                [](SimTime s, const TimeInterval& iv) { return s < iv.start; });
  if (first != list.begin() && std::prev(first)->end + bridge >= next.start) {
    --first;
    next.start = first->start;
  }
  auto last = first;
  while (last != list.end() && last->start <= next.end + bridge) {
    next.end = std::max(next.end, last->end);
    ++last;
  }
  first = list.erase(first, last);
  list.insert(first, next);
}

ChannelBreakdown ChannelLedger::breakdown() const {
  auto join = [](std::initializer_list<const std::vector<TimeInterval>*> lists) {
    std::vector<TimeInterval> all;
    for (auto* l : lists) all.insert(all.end(), l->begin(), l->end());
    return measure(merge_intervals(std::move(all)));
  };
  ChannelBreakdown b;
  b.reserved = measure(reserved_);
  const Duration rt = join({&reserved_, &transaction_});
  b.total = join({&reserved_, &transaction_, &collision_});
  b.transaction = rt - b.reserved;
  b.collision = b.total - rt;
  return b;
}

double channel_time_per_frame(const ChannelLedger& ledger, std::uint64_t delivered) {
  if (delivered == 0) {
    throw std::domain_error("channel time per frame is undefined with no delivered frames");
  }
  return to_seconds(ledger.breakdown().total) / static_cast<double>(delivered);
}

double student_t_975(std::size_t degrees_of_freedom) {
  if (degrees_of_freedom == 0) {
    throw std::invalid_argument("Student t needs at least one degree of freedom");
  }
  const boost::math::students_t dist(static_cast<double>(degrees_of_freedom));
  return boost::math::quantile(dist, 0.975);
}

MetricStats summarize(std::span<const double> values) {
  MetricStats s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  s.ci95 = student_t_975(values.size() - 1) * s.sd / std::sqrt(static_cast<double>(values.size()));
  return s;
}

RegressionFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) {
    throw std::invalid_argument("regression needs at least three paired points");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) {
    throw std::invalid_argument("regression needs at least two distinct x values");
  }
  RegressionFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    sse += r * r;
  }
  fit.slope_se = std::sqrt(sse / (n - 2.0) / sxx);
  fit.slope_ci95 = student_t_975(x.size() - 2) * fit.slope_se;
  return fit;
}

}  // namespace wurba
