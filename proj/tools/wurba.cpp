#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "wurba/config.hpp"
#include "wurba/selfcheck.hpp"
#include "wurba/sweep.hpp"
#include "wurba/wur_codec.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSelfCheck = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> settings;
};

wurba::ScenarioConfig load(const CommonOptions& common) {
  wurba::ScenarioConfig config;
  if (!common.config_path.empty()) config = wurba::load_config(common.config_path);
  for (const std::string& setting : common.settings) {
    const auto eq = setting.find('=');
    if (eq == std::string::npos) throw wurba::ConfigError("", fmt::format("--set expects key=value, got '{}'", setting));
    wurba::apply_setting(config, setting.substr(0, eq), setting.substr(eq + 1));
  }
  if (common.seed) config.seed = *common.seed;
  return config;
}

std::vector<std::uint8_t> parse_hex_bytes(const std::string& hex) {
  std::string digits;
  for (char c : hex) {
    if (c != ' ' && c != ':') digits.push_back(c);
  }
  if (digits.starts_with("0x") || digits.starts_with("0X")) digits.erase(0, 2);
  if (digits.size() % 2 != 0) throw wurba::ConfigError("body", "hex body needs an even number of digits");
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < digits.size(); i += 2) {
    unsigned value = 0;
    const auto [ptr, ec] = std::from_chars(digits.data() + i, digits.data() + i + 2, value, 16);
    if (ec != std::errc{} || ptr != digits.data() + i + 2) {
      throw wurba::ConfigError("body", fmt::format("invalid hex '{}'", digits.substr(i, 2)));
    }
    out.push_back(static_cast<std::uint8_t>(value));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IEEE 802.11ba wake-up radio simulator and WUR frame codec"};
  app.require_subcommand(1);

  CommonOptions common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "Flat key = value configuration file");
    sub->add_option("--seed", common.seed, "Master seed");
    sub->add_option("--set", common.settings, "Override one key (key=value); repeatable");
  };

  auto* run = app.add_subcommand("run", "Sweep methods over clock-drift sigma and write CSVs");
  add_common(run);
  std::string out_dir = "out";
  std::string methods;
  std::string sigmas;
  std::optional<std::uint32_t> replications;
  std::optional<std::uint32_t> frames;
  std::optional<unsigned> threads;
  bool trace = false;
  bool quiet = false;
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--method", methods, "Comma-separated methods (twt_plain,twt_tf,twt_guard,wur_cts or all)");
  run->add_option("--sigma", sigmas, "Comma-separated sigma values in seconds");
  run->add_option("--replications", replications, "Replications per point");
  run->add_option("--frames", frames, "Sensor frames per run");
  run->add_option("--threads", threads, "Worker threads");
  run->add_flag("--trace", trace, "Write the event trace to OUT/trace.log");
  run->add_flag("--quiet", quiet, "No progress output");

  auto* inspect = app.add_subcommand("inspect", "Encode a WUR frame, or decode one with --bits");
  add_common(inspect);
  std::string type = "wakeup";
  std::uint32_t address = 0;
  std::uint32_t td_control = 0;
  std::string body_hex;
  std::string rate_text;
  std::string bits_text;
  inspect->add_option("--type", type, "wakeup, wurbeacon, wurdiscovery or vendorspecific")->capture_default_str();
  inspect->add_option("--address", address, "12-bit address (0xFFF is broadcast)");
  inspect->add_option("--td-control", td_control, "12-bit type-dependent control");
  inspect->add_option("--body", body_hex, "Frame body as hex bytes");
  inspect->add_option("--rate", rate_text, "LDR or HDR (default: config wur_rate)");
  inspect->add_option("--bits", bits_text, "Serialized MAC frame as a 0/1 string to decode");

  auto* selfcheck = app.add_subcommand("selfcheck", "Closed-form oracle scenarios and codec golden vectors");
  add_common(selfcheck);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    wurba::ScenarioConfig config = load(common);

    if (*run) {
      if (!methods.empty()) config.methods = wurba::parse_method_list(methods);
      if (!sigmas.empty()) config.sigma_list_s = wurba::parse_sigma_list(sigmas);
      if (replications) config.replications = *replications;
      if (frames) config.frames_per_run = *frames;
      if (threads) config.threads = *threads;
      config.validate();
      if (config.replications < 2) {
        std::cerr << "warning: a single replication gives no confidence interval\n";
      }

      std::ofstream trace_file;
      wurba::SweepOptions options;
      if (trace) {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        trace_file.open(std::filesystem::path(out_dir) / "trace.log", std::ios::binary | std::ios::trunc);
        if (!trace_file) throw wurba::IoError(fmt::format("cannot write trace in '{}'", out_dir));
        options.trace = &trace_file;
      }
      if (!quiet) {
        options.progress = [](std::size_t done, std::size_t total) {
          std::cerr << fmt::format("\r{}/{} runs", done, total) << (done == total ? "\n" : "") << std::flush;
        };
      }
      const auto sweep = wurba::run_sweep(config, options);
      const auto files = wurba::write_sweep_outputs(out_dir, config, sweep);
      std::cout << fmt::format("wrote {}\nwrote {}\nwrote {}\n", files.raw.string(), files.aggregate.string(),
                               files.energy.string());
      return kExitOk;
    }

    if (*inspect) {
      wurba::DataRate rate = config.wur_rate;
      if (!rate_text.empty()) {
        const auto parsed = wurba::parse_data_rate(rate_text);
        if (!parsed) throw wurba::ConfigError("rate", fmt::format("expected LDR or HDR, got '{}'", rate_text));
        rate = *parsed;
      }
      wurba::WurFrame frame;
      if (!bits_text.empty()) {
        wurba::Bits bits;
        for (char c : bits_text) {
          if (c == '0' || c == '1') {
            bits.push_back(static_cast<std::uint8_t>(c - '0'));
          } else if (c != ' ' && c != '_') {
            throw wurba::ConfigError("bits", fmt::format("unexpected character '{}'", c));
          }
        }
        try {
          frame = wurba::deserialize_mac(bits);
        } catch (const wurba::CodecError& e) {
          std::cerr << "decode error: " << e.what() << '\n';
          return kExitConfig;
        }
      } else {
        const auto parsed = wurba::parse_frame_type(type);
        if (!parsed) throw wurba::ConfigError("type", fmt::format("unknown frame type '{}'", type));
        if (address > wurba::kMaxAddress) throw wurba::ConfigError("address", "address is 12 bits");
        if (td_control > 0x0FFF) throw wurba::ConfigError("td-control", "TD control is 12 bits");
        frame.type = *parsed;
        frame.address = static_cast<std::uint16_t>(address);
        frame.td_control = static_cast<std::uint16_t>(td_control);
        frame.body = parse_hex_bytes(body_hex);
        frame = wurba::finalize(frame);
      }
      std::cout << wurba::describe_frame(frame, rate, config.sync_pattern, config.ldr_sync_order);
      return kExitOk;
    }

    if (*selfcheck) {
      const auto items = wurba::run_self_check(config);
      bool all = true;
      for (const auto& item : items) {
        std::cout << fmt::format("{} {} ({})\n", item.pass ? "PASS" : "FAIL", item.name, item.detail);
        all = all && item.pass;
      }
      std::cout << (all ? "selfcheck: all passed\n" : "selfcheck: FAILED\n");
      return all ? kExitOk : kExitSelfCheck;
    }
  } catch (const wurba::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const wurba::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}
