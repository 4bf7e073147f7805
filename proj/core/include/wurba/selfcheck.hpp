#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wurba/scenario.hpp"

namespace wurba {

/// Hand-derived per-frame energy and channel time for one sensor, no
/// saturated stations and zero drift, given the backoff counter the
/// contending station drew.
struct ClosedForm {
  double energy_j = 0.0;
  Duration channel_time{0};
};

ClosedForm closed_form(const ScenarioConfig& config, MethodKind method, std::uint32_t backoff_slots);

struct SelfCheckItem {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Codec golden vectors plus the single-sensor closed forms for every
/// method, simulated with `config` (sensors, saturated stations and sigma
/// are overridden).
std::vector<SelfCheckItem> run_self_check(const ScenarioConfig& config = {});

}  // namespace wurba
