#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "wurba/mac_edca.hpp"
#include "wurba/stations.hpp"
#include "wurba/wur_codec.hpp"

namespace wurba {

/// The four uplink delivery methods under comparison.
enum class MethodKind : std::uint8_t { TwtPlain, TwtWithTf, TwtGuard, WurCts };

inline constexpr MethodKind kAllMethods[] = {MethodKind::TwtPlain, MethodKind::TwtWithTf, MethodKind::TwtGuard,
                                             MethodKind::WurCts};

std::string_view to_string(MethodKind method);
std::optional<MethodKind> parse_method(std::string_view text);

/// Everything that defines an experiment. Defaults reproduce the reference
/// setup: 10 saturated stations, 10 sensors, MCS0 data frames of 1480 us
/// and bodiless LDR wake-up frames.
struct ScenarioConfig {
  std::uint32_t saturated_stations = 10;
  std::uint32_t sensors = 10;
  std::vector<double> sigma_list_s{0.001, 0.003, 0.01, 0.03, 0.1};
  std::vector<MethodKind> methods{kAllMethods, kAllMethods + 4};
  std::uint32_t frames_per_run = 100;
  std::uint32_t replications = 10;
  std::uint64_t seed = 1;

  ExchangeTiming timing;
  EdcaParams edca;
  PowerProfile power;
  DataRate wur_rate = DataRate::LDR;
  std::uint32_t sync_pattern = default_sync_pattern();
  LdrSyncOrder ldr_sync_order = LdrSyncOrder::ComplementTwice;

  /// The AP waits guard_sigmas * sigma past a target before triggering.
  double guard_sigmas = 4.0;
  /// Spacing of consecutive sensor targets (methods 1, 2, 4); zero picks
  /// 2 * guard + isolation_margin.
  Duration target_gap{0};
  Duration isolation_margin = milliseconds(100);
  Duration warmup = milliseconds(50);
  /// AP wait for the sensor's DATA after TF / wake-up; zero picks
  /// 2 * switch-on delay + DATA exchange.
  Duration miss_timeout{0};
  /// WUR beacon period (method 4); zero disables beacons.
  Duration beacon_period{0};
  /// Drift grows with time since the last beacon when positive.
  Duration drift_reference{0};
  /// Hard stop per run; zero means last target + 60 s.
  Duration horizon{0};
  unsigned threads = 1;

  /// Throws ConfigError naming the offending key.
  void validate() const;

  Duration guard_for(Duration sigma) const;
  Duration effective_miss_timeout() const;
  Duration wur_frame_airtime() const;
};

}  // namespace wurba
