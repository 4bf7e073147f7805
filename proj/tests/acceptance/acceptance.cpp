// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/core.h>

#include "wurba/config.hpp"
#include "wurba/methods.hpp"
#include "wurba/sim_kernel.hpp"
#include "wurba/sweep.hpp"
#include "wurba/wur_codec.hpp"

using namespace wurba;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  fmt::print("{} {:>2} {}: {}\n", pass ? "PASS" : "FAIL", id, what, detail);
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void criterion_airtime() {
  WurFrame wake;
  wake.address = 0x123;
  const auto ldr = ppdu_airtime(wake, DataRate::LDR);
  const auto hdr = ppdu_airtime(wake, DataRate::HDR);
  const bool ok = ldr.total == microseconds(920) && hdr.total == microseconds(280) &&
                  ldr.preamble + ldr.bpsk_mark + ldr.sync + ldr.data + ldr.padding == ldr.total &&
                  hdr.preamble + hdr.bpsk_mark + hdr.sync + hdr.data + hdr.padding == hdr.total;
  report(1, ok, "bodiless WUR PPDU airtime",
         fmt::format("LDR {} us, HDR {} us", to_microseconds(ldr.total), to_microseconds(hdr.total)));
}

void criterion_rates() {
  bool ok = true;
  std::string detail;
  for (auto [rate, bps] : {std::pair{DataRate::LDR, 62500LL}, std::pair{DataRate::HDR, 250000LL}}) {
    for (std::size_t bits : {48u, 56u, 48u + 8u * 64u}) {
      const auto layout = ppdu_airtime(bits, rate);
      // bits / data_seconds == bps, compared in integer nanoseconds.
      ok = ok && static_cast<long long>(bits) * 1'000'000'000LL == bps * layout.data.count();
    }
    const auto l = ppdu_airtime(48, rate);
    detail += fmt::format("{} {} kbps ", to_string(rate), 48.0 / to_seconds(l.data) / 1e3);
  }
  report(2, ok, "WUR payload rates", detail);
}

void criterion_properties() {
  RngStream rng(2024, 0);
  std::size_t manchester = 0;
  bool ok = true;
  for (auto rate : {DataRate::LDR, DataRate::HDR}) {
    for (int i = 0; i < 10000; ++i) {
      Bits bits(1 + rng.uniform_int(255));
      for (auto& b : bits) b = static_cast<std::uint8_t>(rng.uniform_int(1));
      const bool same = decode_manchester(encode_manchester(bits, rate), rate) == bits;
      ok = ok && same;
      manchester += same;
    }
  }
  std::size_t mac = 0;
  for (int i = 0; i < 10000; ++i) {
    WurFrame f;
    f.type = static_cast<WurFrameType>(rng.uniform_int(3));
    f.address = static_cast<std::uint16_t>(rng.uniform_int(0xFFF));
    f.td_control = static_cast<std::uint16_t>(rng.uniform_int(0xFFF));
    if (rng.uniform_int(1) == 1) {
      f.body.resize(1 + rng.uniform_int(15));
      for (auto& b : f.body) b = static_cast<std::uint8_t>(rng.uniform_int(255));
    }
    const bool same = deserialize_mac(serialize_mac(f)) == finalize(f);
    ok = ok && same;
    mac += same;
  }
  WurFrame base;
  base.address = 0x5A5;
  base.td_control = 0x0F0;
  const Bits good = serialize_mac(base);
  std::size_t detected = 0;
  for (std::size_t pos = 0; pos < good.size(); ++pos) {
    Bits bad = good;
    bad[pos] ^= 1;
    try {
      deserialize_mac(bad);
    } catch (const CodecError&) {
      ++detected;
    }
  }
  ok = ok && good.size() == 48 && detected == 48;
  std::size_t aligned = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<FdmaEntry> entries;
    const int count = 1 + static_cast<int>(rng.uniform_int(3));
    for (int s = 0; s < count; ++s) {
      FdmaEntry e;
      e.subchannel = s;
      e.rate = rng.uniform_int(1) == 0 ? DataRate::LDR : DataRate::HDR;
      e.frame.body.resize(rng.uniform_int(8));
      entries.push_back(e);
    }
    const auto layouts = fdma_align(entries);
    const bool equal = std::all_of(layouts.begin(), layouts.end(),
                                   [&](const PpduLayout& l) { return l.total == layouts.front().total; });
    ok = ok && equal;
    aligned += equal;
  }
  report(3, ok, "codec property suites",
         fmt::format("manchester {}/20000, mac {}/10000, fcs flips {}/48, fdma {}/1000", manchester, mac, detected,
                     aligned));
}

void criterion_closed_forms() {
  // Hand-derived per-frame values in microjoules / microseconds for one
  // sensor, no other stations, zero drift; k is the contending backoff.
  struct Oracle {
    MethodKind method;
    double energy_base_uj;
    double energy_per_slot_uj;
    std::int64_t channel_us;
  };
  const Oracle oracles[] = {{MethodKind::TwtPlain, 624.7, 0.9, 1540},
                            {MethodKind::TwtWithTf, 636.3, 0.9, 1656},
                            {MethodKind::TwtGuard, 620.4, 0.0, 1540},
                            {MethodKind::WurCts, 622.56265, 0.00495, 2520}};
  ScenarioConfig c;
  c.saturated_stations = 0;
  c.sensors = 1;
  c.frames_per_run = 50;
  RunOptions o;
  o.keep_frames = true;
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  double worst_nj = 0.0;
  std::int64_t worst_ns = 0;
  for (const auto& oracle : oracles) {
    const auto r = run_method(c, oracle.method, Duration{0}, 7, o);
    ok = ok && r.frames_delivered == c.frames_per_run;
    for (const auto& f : r.frames) {
      const double k = f.first_backoff < 0 ? 0.0 : f.first_backoff;
      const double expected = (oracle.energy_base_uj + oracle.energy_per_slot_uj * k) * 1e-6;
      worst_nj = std::max(worst_nj, std::abs(f.energy_j - expected) * 1e9);
    }
    const Duration expected_channel = microseconds(oracle.channel_us) * static_cast<std::int64_t>(c.frames_per_run);
    worst_ns = std::max(worst_ns, std::abs((r.channel.total - expected_channel).count()));
  }
  const double elapsed = seconds_since(t0);
  ok = ok && worst_nj <= 1.0 && worst_ns <= 1 && elapsed < 1.0;
  report(4, ok, "closed-form oracle, one sensor, no contention",
         fmt::format("max energy error {:.3g} nJ, max channel error {} ns, {:.2f} s", worst_nj, worst_ns, elapsed));
}

void criterion_four_sigma() {
  ScenarioConfig c;
  c.saturated_stations = 0;
  c.sensors = 1;
  constexpr std::uint32_t kRuns = 10;
  c.frames_per_run = 100000;
  const Duration sigma = milliseconds(10);
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (auto method : {MethodKind::TwtWithTf, MethodKind::WurCts}) {
    std::uint64_t misses = 0;
    std::uint64_t rounds = 0;
    std::uint64_t delivered = 0;
    for (std::uint32_t rep = 0; rep < kRuns; ++rep) {
      const auto r = run_method(c, method, sigma, derive_run_seed(c.seed, method, 0.01, rep));
      misses += r.misses;
      rounds += r.frames_generated;
      delivered += r.frames_delivered;
    }
    const double fraction = static_cast<double>(misses) / static_cast<double>(rounds);
    ok = ok && rounds == 1'000'000 && delivered == rounds && fraction < 1e-4;
    detail += fmt::format("{} {}/{} = {:.2e}; ", to_string(method), misses, rounds, fraction);
  }
  const double elapsed = seconds_since(t0);
  ok = ok && elapsed < 60.0;
  report(5, ok, "TF / wake-up miss fraction at sigma = 10 ms", detail + fmt::format("{:.1f} s", elapsed));
}

std::vector<double> channel_times(const SweepResult& s, MethodKind m, std::vector<double>& sigmas) {
  std::vector<double> y;
  sigmas.clear();
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    if (s.points[i].method != m) continue;
    sigmas.push_back(s.points[i].sigma_s);
    y.push_back(s.runs[i].channel_time_per_frame_s);
  }
  return y;
}

const AggregateRow* row_for(const std::vector<AggregateRow>& rows, MethodKind m, double sigma) {
  for (const auto& r : rows) {
    if (r.method == m && r.sigma_s == sigma) return &r;
  }
  return nullptr;
}

void criterion_channel_trend(const SweepResult& sweep, const std::vector<AggregateRow>& rows, double elapsed) {
  bool ok = elapsed < 60.0;
  std::string detail;
  for (auto m : {MethodKind::TwtPlain, MethodKind::TwtWithTf, MethodKind::WurCts}) {
    std::vector<double> x;
    const auto y = channel_times(sweep, m, x);
    const auto fit = fit_line(x, y);
    ok = ok && fit.slope_ci_contains_zero();
    detail += fmt::format("{} slope {:.3g}+-{:.3g} ms/s; ", to_string(m), fit.slope * 1e3, fit.slope_ci95 * 1e3);
  }
  std::vector<double> means;
  for (double s : {0.001, 0.003, 0.01, 0.03, 0.1}) {
    const auto* r = row_for(rows, MethodKind::TwtGuard, s);
    means.push_back(r ? r->channel_time_per_frame.mean : 0.0);
  }
  const bool grows = std::is_sorted(means.begin(), means.end()) && means.front() < means.back();
  ok = ok && grows && means.back() > 10e-3;
  detail += fmt::format("twt_guard means {:.2f} {:.2f} {:.2f} {:.2f} {:.2f} ms; sweep {:.1f} s", means[0] * 1e3,
                        means[1] * 1e3, means[2] * 1e3, means[3] * 1e3, means[4] * 1e3, elapsed);
  report(6, ok, "channel time vs sigma", detail);
}

void criterion_wur_overhead(const std::vector<AggregateRow>& rows) {
  bool ok = true;
  std::string detail;
  for (double s : {0.001, 0.003, 0.01}) {
    const auto* wur = row_for(rows, MethodKind::WurCts, s);
    const auto* plain = row_for(rows, MethodKind::TwtPlain, s);
    const double ratio = wur->channel_time_per_frame.mean / plain->channel_time_per_frame.mean;
    ok = ok && ratio >= 1.3 && ratio <= 1.7;
    detail += fmt::format("sigma {} ms: {:.3f}; ", s * 1e3, ratio);
  }
  report(7, ok, "WUR channel overhead vs plain TWT", detail);
}

void criterion_energy(const std::vector<AggregateRow>& rows) {
  bool ok = true;
  std::string detail;
  auto energy = [&](MethodKind m, double s) { return row_for(rows, m, s)->energy_per_frame.mean; };
  for (double s : {0.001, 0.003, 0.01}) {
    const double wur = energy(MethodKind::WurCts, s);
    bool lowest = true;
    for (auto m : kAllMethods) {
      if (m != MethodKind::WurCts && energy(m, s) <= wur) lowest = false;
    }
    ok = ok && lowest;
    detail += fmt::format("sigma {} ms: wur_cts {:.1f} uJ vs twt_guard {:.1f} uJ{}; ", s * 1e3, wur * 1e6,
                          energy(MethodKind::TwtGuard, s) * 1e6, lowest ? "" : " (not lowest)");
  }
  const double e1 = energy(MethodKind::TwtPlain, 0.1);
  const double e2 = energy(MethodKind::TwtWithTf, 0.1);
  const double e4 = energy(MethodKind::WurCts, 0.1);
  ok = ok && e2 > e1 && e4 < e2;
  detail += fmt::format("sigma 100 ms: twt_plain {:.0f}, twt_tf {:.0f}, wur_cts {:.0f} uJ", e1 * 1e6, e2 * 1e6,
                        e4 * 1e6);
  report(8, ok, "energy ordering", detail);
}

std::string raw_csv(const ScenarioConfig& c, const SweepResult& s) {
  std::ostringstream out;
  write_raw_csv(out, c, s);
  return out.str();
}

}  // namespace

int main() {
  try {
    criterion_airtime();
    criterion_rates();
    criterion_properties();
    criterion_closed_forms();
    criterion_four_sigma();

    // Default sweep on one thread: drives criteria 6-8 and is the budget run.
    const ScenarioConfig defaults = parse_config("");
    const auto t0 = std::chrono::steady_clock::now();
    const auto sweep = run_sweep(defaults);
    const double elapsed = seconds_since(t0);
    const auto rows = aggregate(sweep);
    criterion_channel_trend(sweep, rows, elapsed);
    criterion_wur_overhead(rows);
    criterion_energy(rows);

    ScenarioConfig again = defaults;
    again.threads = std::max(1u, std::thread::hardware_concurrency());
    const auto first = raw_csv(defaults, sweep);
    const auto second = raw_csv(again, run_sweep(again));
    report(9, first == second, "determinism",
           fmt::format("raw CSV {} bytes, second run on {} threads {}", first.size(), again.threads,
                       first == second ? "identical" : "differs"));

    report(10, elapsed < 300.0, "full default sweep budget",
           fmt::format("{} runs in {:.1f} s on one thread", sweep.runs.size(), elapsed));
  } catch (const std::exception& e) {
    fmt::print("FAIL    acceptance aborted: {}\n", e.what());
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
