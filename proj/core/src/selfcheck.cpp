#include "wurba/selfcheck.hpp"

#include <cmath>
#include <string_view>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "wurba/methods.hpp"
#include "wurba/wur_codec.hpp"

namespace wurba {

ClosedForm closed_form(const ScenarioConfig& config, MethodKind method, std::uint32_t backoff_slots) {
  const ExchangeTiming& t = config.timing;
  const PowerProfile& p = config.power;
  const Duration contention = config.edca.aifs() + static_cast<std::int64_t>(backoff_slots) * config.edca.slot;
  const Duration switch_on = p.pcr_switch_on_delay;
  const Duration ack_wait = t.sifs + t.ack;
  const double off = p.wur_off_mw;

  ClosedForm out;
  double e = 0.0;
  Duration window{0};
  switch (method) {
    case MethodKind::TwtPlain:
      window = switch_on + contention + t.data + ack_wait;
      e = energy_joules(p.switch_on_mw(), switch_on) + energy_joules(p.pcr_listen_mw, contention) +
          energy_joules(p.pcr_tx_mw, t.data) + energy_joules(p.pcr_listen_mw, ack_wait);
      out.channel_time = t.data_exchange();
      break;
    case MethodKind::TwtWithTf:
      window = switch_on + contention + t.trigger + t.sifs + t.data + ack_wait;
      e = energy_joules(p.switch_on_mw(), switch_on) +
          energy_joules(p.pcr_listen_mw, contention + t.trigger + t.sifs) + energy_joules(p.pcr_tx_mw, t.data) +
          energy_joules(p.pcr_listen_mw, ack_wait);
      out.channel_time = t.trigger + t.sifs + t.data_exchange();
      break;
    case MethodKind::TwtGuard:
      window = switch_on + t.data + ack_wait;
      e = energy_joules(p.switch_on_mw(), switch_on) + energy_joules(p.pcr_tx_mw, t.data) +
          energy_joules(p.pcr_listen_mw, ack_wait);
      out.channel_time = t.data_exchange();
      break;
    case MethodKind::WurCts: {
      const Duration wur_on = contention + t.cts + t.sifs + config.wur_frame_airtime();
      e = energy_joules(p.wur_on_mw + p.pcr_doze_mw, wur_on) + energy_joules(p.switch_on_mw(), switch_on) +
          energy_joules(p.pcr_listen_mw, t.sifs) + energy_joules(p.pcr_tx_mw, t.data) +
          energy_joules(p.pcr_listen_mw, ack_wait);
      e += energy_joules(off, switch_on + t.sifs + t.data + ack_wait);
      out.energy_j = e;
      out.channel_time = t.cts + t.sifs + config.wur_frame_airtime() + t.data_exchange();
      return out;
    }
  }
  out.energy_j = e + energy_joules(off, window);
  return out;
}

namespace {

SelfCheckItem check(std::string name, bool pass, std::string detail) {
  return {std::move(name), pass, std::move(detail)};
}

}  // namespace

std::vector<SelfCheckItem> run_self_check(const ScenarioConfig& base) {
  std::vector<SelfCheckItem> items;

  const auto ldr = ppdu_airtime(kMinFrameBits, DataRate::LDR).total;
  const auto hdr = ppdu_airtime(kMinFrameBits, DataRate::HDR).total;
  items.push_back(check("ldr_bodiless_airtime_920us", ldr == microseconds(920),
                        fmt::format("{} us", to_microseconds(ldr))));
  items.push_back(check("hdr_bodiless_airtime_280us", hdr == microseconds(280),
                        fmt::format("{} us", to_microseconds(hdr))));

  const std::string_view check_string = "123456789";
  const std::vector<std::uint8_t> bytes(check_string.begin(), check_string.end());
  const auto fcs = compute_fcs(bytes_to_bits(bytes));
  items.push_back(check("fcs_check_value_29B1", fcs == 0x29B1, fmt::format("0x{:04X}", fcs)));

  const Bits pair{1, 0};
  const auto ldr_symbols = encode_manchester(pair, DataRate::LDR);
  const auto hdr_symbols = encode_manchester(pair, DataRate::HDR);
  items.push_back(check("manchester_ldr_10_to_10100101",
                        ldr_symbols.symbols == std::vector<std::uint8_t>{1, 0, 1, 0, 0, 1, 0, 1},
                        fmt::format("{}", fmt::join(ldr_symbols.symbols, ""))));
  items.push_back(check("manchester_hdr_10_to_1001", hdr_symbols.symbols == std::vector<std::uint8_t>{1, 0, 0, 1},
                        fmt::format("{}", fmt::join(hdr_symbols.symbols, ""))));

  WurFrame frame;
  frame.type = WurFrameType::WakeUp;
  frame.address = 0x123;
  frame.td_control = 0x456;
  const auto bits = serialize_mac(frame);
  bool round_trip = false;
  try {
    round_trip = deserialize_mac(bits) == finalize(frame);
  } catch (const CodecError&) {
  }
  items.push_back(check("wakeup_frame_round_trip", round_trip && bits.size() == kMinFrameBits,
                        fmt::format("{} bits", bits.size())));

  ScenarioConfig config = base;
  config.sensors = 1;
  config.saturated_stations = 0;
  config.frames_per_run = 3;
  config.methods.assign(std::begin(kAllMethods), std::end(kAllMethods));
  for (MethodKind method : kAllMethods) {
    RunOptions options;
    options.keep_frames = true;
    const RunResult r = run_method(config, method, Duration{0}, config.seed, options);
    bool pass = r.frames_delivered == r.frames_generated;
    std::string detail;
    for (const FrameRecord& f : r.frames) {
      const auto k = static_cast<std::uint32_t>(std::max(0, f.first_backoff));
      const ClosedForm expect = closed_form(config, method, k);
      const double diff_nj = std::abs(f.energy_j - expect.energy_j) * 1e9;
      pass = pass && f.delivered() && diff_nj <= 1.0;
      if (detail.empty() || diff_nj > 1.0) {
        detail = fmt::format("backoff {} energy {:.6f} uJ expected {:.6f} uJ", k, f.energy_j * 1e6,
                             expect.energy_j * 1e6);
      }
    }
    const ClosedForm expect0 = closed_form(config, method, 0);
    const Duration channel = r.channel.total / static_cast<std::int64_t>(std::max<std::uint64_t>(1, r.frames_delivered));
    pass = pass && r.channel.total == expect0.channel_time * static_cast<std::int64_t>(r.frames_delivered);
    items.push_back(check(fmt::format("closed_form_{}", to_string(method)), pass,
                          fmt::format("{}; channel {} us expected {} us", detail, to_microseconds(channel),
                                      to_microseconds(expect0.channel_time))));
  }
  return items;
}

}  // namespace wurba
