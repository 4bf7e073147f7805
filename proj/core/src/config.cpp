#include "wurba/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace wurba {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> items;
  // Accept "[a, b]" as well as "a,b".
  text = trim(text);
  if (!text.empty() && text.front() == '[' && text.back() == ']') text = text.substr(1, text.size() - 2);
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (!item.empty()) items.push_back(item);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return items;
}

double parse_double(std::string_view key, std::string_view value) {
  value = trim(value);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw ConfigError(std::string(key), fmt::format("expected a number, got '{}'", value));
  }
  return out;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view value, int base = 10) {
  value = trim(value);
  if (base == 16 && (value.starts_with("0x") || value.starts_with("0X"))) value.remove_prefix(2);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out, base);
  if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError(std::string(key), fmt::format("expected a non-negative integer, got '{}'", value));
  }
  return out;
}

std::uint32_t parse_u32(std::string_view key, std::string_view value) {
  const auto v = parse_unsigned(key, value);
  if (v > 0xFFFFFFFFull) throw ConfigError(std::string(key), "value out of range");
  return static_cast<std::uint32_t>(v);
}

Duration parse_us(std::string_view key, std::string_view value) {
  return from_microseconds(parse_double(key, value));
}

std::string fmt_us(Duration d) { return fmt::format("{}", to_microseconds(d)); }

using Setter = std::function<void(ScenarioConfig&, std::string_view key, std::string_view value)>;
using Getter = std::function<std::string(const ScenarioConfig&)>;

struct KeySpec {
  std::string_view key;
  Setter set;
  Getter get;
};

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"saturated_stations", [](auto& c, auto k, auto v) { c.saturated_stations = parse_u32(k, v); },
       [](const auto& c) { return fmt::format("{}", c.saturated_stations); }},
      {"sensors", [](auto& c, auto k, auto v) { c.sensors = parse_u32(k, v); },
       [](const auto& c) { return fmt::format("{}", c.sensors); }},
      {"sigma_list", [](auto& c, auto, auto v) { c.sigma_list_s = parse_sigma_list(v); },
       [](const auto& c) { return fmt::format("{}", fmt::join(c.sigma_list_s, ",")); }},
      {"methods", [](auto& c, auto, auto v) { c.methods = parse_method_list(v); },
       [](const auto& c) {
         std::vector<std::string_view> names;
         for (auto m : c.methods) names.push_back(to_string(m));
         return fmt::format("{}", fmt::join(names, ","));
       }},
      {"frames_per_run", [](auto& c, auto k, auto v) { c.frames_per_run = parse_u32(k, v); },
       [](const auto& c) { return fmt::format("{}", c.frames_per_run); }},
      {"replications", [](auto& c, auto k, auto v) { c.replications = parse_u32(k, v); },
       [](const auto& c) { return fmt::format("{}", c.replications); }},
      {"seed", [](auto& c, auto k, auto v) { c.seed = parse_unsigned(k, v); },
       [](const auto& c) { return fmt::format("{}", c.seed); }},
      {"data_duration_us", [](auto& c, auto k, auto v) { c.timing.data = parse_us(k, v); },
       [](const auto& c) { return fmt_us(c.timing.data); }},
      {"wur_rate",
       [](auto& c, auto k, auto v) {
         const auto rate = parse_data_rate(trim(v));
         if (!rate) throw ConfigError(std::string(k), fmt::format("expected LDR or HDR, got '{}'", v));
         c.wur_rate = *rate;
       },
       [](const auto& c) { return std::string(to_string(c.wur_rate)); }},
      {"slot_us",
       [](auto& c, auto k, auto v) {
         c.timing.slot = parse_us(k, v);
         c.edca.slot = c.timing.slot;
       },
       [](const auto& c) { return fmt_us(c.timing.slot); }},
      {"sifs_us",
       [](auto& c, auto k, auto v) {
         c.timing.sifs = parse_us(k, v);
         c.edca.sifs = c.timing.sifs;
       },
       [](const auto& c) { return fmt_us(c.timing.sifs); }},
      {"aifsn", [](auto& c, auto k, auto v) { c.edca.aifsn = parse_u32(k, v); },
       [](const auto& c) { return fmt::format("{}", c.edca.aifsn); }},
      {"cw_min", [](auto& c, auto k, auto v) { c.edca.cw_min = parse_u32(k, v); },
       [](const auto& c) { return fmt::format("{}", c.edca.cw_min); }},
      {"cw_max", [](auto& c, auto k, auto v) { c.edca.cw_max = parse_u32(k, v); },
       [](const auto& c) { return fmt::format("{}", c.edca.cw_max); }},
      {"ack_us", [](auto& c, auto k, auto v) { c.timing.ack = parse_us(k, v); },
       [](const auto& c) { return fmt_us(c.timing.ack); }},
      {"cts_us", [](auto& c, auto k, auto v) { c.timing.cts = parse_us(k, v); },
       [](const auto& c) { return fmt_us(c.timing.cts); }},
      {"tf_us", [](auto& c, auto k, auto v) { c.timing.trigger = parse_us(k, v); },
       [](const auto& c) { return fmt_us(c.timing.trigger); }},
      {"pspoll_us", [](auto& c, auto k, auto v) { c.timing.ps_poll = parse_us(k, v); },
       [](const auto& c) { return fmt_us(c.timing.ps_poll); }},
      {"p_pcr_tx_mw", [](auto& c, auto k, auto v) { c.power.pcr_tx_mw = parse_double(k, v); },
       [](const auto& c) { return fmt::format("{}", c.power.pcr_tx_mw); }},
      {"p_pcr_listen_mw", [](auto& c, auto k, auto v) { c.power.pcr_listen_mw = parse_double(k, v); },
       [](const auto& c) { return fmt::format("{}", c.power.pcr_listen_mw); }},
      {"p_pcr_doze_mw", [](auto& c, auto k, auto v) { c.power.pcr_doze_mw = parse_double(k, v); },
       [](const auto& c) { return fmt::format("{}", c.power.pcr_doze_mw); }},
      {"p_wur_on_mw", [](auto& c, auto k, auto v) { c.power.wur_on_mw = parse_double(k, v); },
       [](const auto& c) { return fmt::format("{}", c.power.wur_on_mw); }},
      {"p_wur_off_mw", [](auto& c, auto k, auto v) { c.power.wur_off_mw = parse_double(k, v); },
       [](const auto& c) { return fmt::format("{}", c.power.wur_off_mw); }},
      {"p_pcr_switch_on_mw",
       [](auto& c, auto k, auto v) {
         if (trim(v) == "listen") {
           c.power.pcr_switch_on_mw.reset();
         } else {
           c.power.pcr_switch_on_mw = parse_double(k, v);
         }
       },
       [](const auto& c) {
         return c.power.pcr_switch_on_mw ? fmt::format("{}", *c.power.pcr_switch_on_mw) : std::string("listen");
       }},
      {"switch_on_delay_us", [](auto& c, auto k, auto v) { c.power.pcr_switch_on_delay = parse_us(k, v); },
       [](const auto& c) { return fmt_us(c.power.pcr_switch_on_delay); }},
      {"guard_sigmas", [](auto& c, auto k, auto v) { c.guard_sigmas = parse_double(k, v); },
       [](const auto& c) { return fmt::format("{}", c.guard_sigmas); }},
      {"target_gap_us", [](auto& c, auto k, auto v) { c.target_gap = parse_us(k, v); },
       [](const auto& c) { return fmt_us(c.target_gap); }},
      {"isolation_margin_us", [](auto& c, auto k, auto v) { c.isolation_margin = parse_us(k, v); },
       [](const auto& c) { return fmt_us(c.isolation_margin); }},
      {"warmup_us", [](auto& c, auto k, auto v) { c.warmup = parse_us(k, v); },
       [](const auto& c) { return fmt_us(c.warmup); }},
      {"miss_timeout_us", [](auto& c, auto k, auto v) { c.miss_timeout = parse_us(k, v); },
       [](const auto& c) { return fmt_us(c.miss_timeout); }},
      {"beacon_period_us", [](auto& c, auto k, auto v) { c.beacon_period = parse_us(k, v); },
       [](const auto& c) { return fmt_us(c.beacon_period); }},
      {"drift_reference_us", [](auto& c, auto k, auto v) { c.drift_reference = parse_us(k, v); },
       [](const auto& c) { return fmt_us(c.drift_reference); }},
      {"sync_pattern",
       [](auto& c, auto k, auto v) {
         const auto p = parse_unsigned(k, v, 16);
         if (p > 0xFFFFFFFFull) throw ConfigError(std::string(k), "sync pattern is 32 bits");
         c.sync_pattern = static_cast<std::uint32_t>(p);
       },
       [](const auto& c) { return fmt::format("0x{:08X}", c.sync_pattern); }},
      {"ldr_sync_order",
       [](auto& c, auto k, auto v) {
         v = trim(v);
         if (v == "complement_twice") {
           c.ldr_sync_order = LdrSyncOrder::ComplementTwice;
         } else if (v == "plain_then_complement") {
           c.ldr_sync_order = LdrSyncOrder::PlainThenComplement;
         } else {
           throw ConfigError(std::string(k),
                             fmt::format("expected complement_twice or plain_then_complement, got '{}'", v));
         }
       },
       [](const auto& c) {
         return std::string(c.ldr_sync_order == LdrSyncOrder::ComplementTwice ? "complement_twice"
                                                                               : "plain_then_complement");
       }},
      {"horizon_s", [](auto& c, auto k, auto v) { c.horizon = from_seconds(parse_double(k, v)); },
       [](const auto& c) { return fmt::format("{}", to_seconds(c.horizon)); }},
      {"threads", [](auto& c, auto k, auto v) { c.threads = parse_u32(k, v); },
       [](const auto& c) { return fmt::format("{}", c.threads); }},
  };
  return table;
}

}  // namespace

std::vector<double> parse_sigma_list(std::string_view text) {
  std::vector<double> out;
  for (auto item : split_list(text)) {
    const double s = parse_double("sigma_list", item);
    if (s < 0.0) throw ConfigError("sigma_list", fmt::format("sigma must be >= 0, got {}", s));
    out.push_back(s);
  }
  if (out.empty()) throw ConfigError("sigma_list", "must not be empty");
  return out;
}

std::vector<MethodKind> parse_method_list(std::string_view text) {
  std::vector<MethodKind> out;
  for (auto item : split_list(text)) {
    if (item == "all") {
      out.assign(std::begin(kAllMethods), std::end(kAllMethods));
      continue;
    }
    const auto m = parse_method(item);
    if (!m) throw ConfigError("methods", fmt::format("unknown method '{}'", item));
    out.push_back(*m);
  }
  if (out.empty()) throw ConfigError("methods", "must not be empty");
  return out;
}

void apply_setting(ScenarioConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  for (const auto& spec : key_table()) {
    if (spec.key == key) {
      spec.set(config, key, value);
      return;
    }
  }
  throw ConfigError(std::string(key), "unknown configuration key");
}

ScenarioConfig parse_config(std::string_view text, ScenarioConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("", fmt::format("line {}: expected 'key = value'", line_no));
    }
    apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  base.validate();
  return base;
}

ScenarioConfig load_config(const std::filesystem::path& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot read config file '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(base));
}

std::vector<std::pair<std::string, std::string>> config_entries(const ScenarioConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& spec : key_table()) out.emplace_back(std::string(spec.key), spec.get(config));
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& spec : key_table()) out.emplace_back(spec.key);
  return out;
}

}  // namespace wurba
