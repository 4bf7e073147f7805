#include "wurba/scenario.hpp"

#include <cmath>

#include <fmt/format.h>

namespace wurba {

std::string_view to_string(MethodKind method) {
  switch (method) {
    case MethodKind::TwtPlain: return "twt_plain";
    case MethodKind::TwtWithTf: return "twt_tf";
    case MethodKind::TwtGuard: return "twt_guard";
    case MethodKind::WurCts: return "wur_cts";
  }
  return "unknown";
}

std::optional<MethodKind> parse_method(std::string_view text) {
  for (MethodKind m : kAllMethods) {
    if (to_string(m) == text) return m;
  }
  if (text == "1") return MethodKind::TwtPlain;
  if (text == "2") return MethodKind::TwtWithTf;
  if (text == "3") return MethodKind::TwtGuard;
  if (text == "4") return MethodKind::WurCts;
  return std::nullopt;
}

namespace {

void require_positive(Duration d, const char* key) {
  if (d.count() <= 0) throw ConfigError(key, "must be positive");
}

}  // namespace

void ScenarioConfig::validate() const {
  if (sensors == 0) throw ConfigError("sensors", "need at least one sensor");
  if (frames_per_run == 0) throw ConfigError("frames_per_run", "must be positive");
  if (replications == 0) throw ConfigError("replications", "must be positive");
  if (sigma_list_s.empty()) throw ConfigError("sigma_list", "must not be empty");
  for (double s : sigma_list_s) {
    if (!std::isfinite(s) || s < 0.0) throw ConfigError("sigma_list", fmt::format("invalid sigma {}", s));
  }
  if (methods.empty()) throw ConfigError("methods", "must not be empty");
  edca.validate();
  power.validate();
  require_positive(timing.data, "data_duration_us");
  require_positive(timing.ack, "ack_us");
  require_positive(timing.cts, "cts_us");
  require_positive(timing.trigger, "tf_us");
  require_positive(timing.ps_poll, "pspoll_us");
  require_positive(timing.sifs, "sifs_us");
  require_positive(timing.slot, "slot_us");
  if (timing.sifs != edca.sifs) throw ConfigError("sifs_us", "EDCA and exchange SIFS differ");
  if (timing.slot != edca.slot) throw ConfigError("slot_us", "EDCA and exchange slot differ");
  if (!std::isfinite(guard_sigmas) || guard_sigmas < 0.0) throw ConfigError("guard_sigmas", "must be >= 0");
  if (isolation_margin < timing.data_exchange()) {
    throw ConfigError("isolation_margin_us", "must cover at least one DATA exchange");
  }
  if (warmup.count() < 0) throw ConfigError("warmup_us", "must be >= 0");
  if (target_gap.count() < 0) throw ConfigError("target_gap_us", "must be >= 0");
  if (miss_timeout.count() < 0) throw ConfigError("miss_timeout_us", "must be >= 0");
  if (beacon_period.count() < 0) throw ConfigError("beacon_period_us", "must be >= 0");
  if (drift_reference.count() < 0) throw ConfigError("drift_reference_us", "must be >= 0");
  if (horizon.count() < 0) throw ConfigError("horizon_s", "must be >= 0");
  if (threads == 0) throw ConfigError("threads", "must be positive");
  if (sensors >= 0xFFF) throw ConfigError("sensors", "WUR addresses are 12 bits");
}

Duration ScenarioConfig::guard_for(Duration sigma) const {
  return Duration{static_cast<Duration::rep>(std::llround(guard_sigmas * static_cast<double>(sigma.count())))};
}

Duration ScenarioConfig::effective_miss_timeout() const {
  if (miss_timeout.count() > 0) return miss_timeout;
  return 2 * power.pcr_switch_on_delay + timing.data_exchange();
}

Duration ScenarioConfig::wur_frame_airtime() const {
  WurFrame frame;
  frame.type = WurFrameType::WakeUp;
  frame.address = 1;
  return ppdu_airtime(finalize(frame), wur_rate).total;
}

}  // namespace wurba
