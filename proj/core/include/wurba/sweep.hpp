#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <vector>

#include "wurba/methods.hpp"
#include "wurba/metrics.hpp"
#include "wurba/scenario.hpp"

namespace wurba {

struct SweepPoint {
  MethodKind method = MethodKind::TwtPlain;
  double sigma_s = 0.0;
  std::uint32_t replication = 0;
  std::uint64_t seed = 0;
};

/// Per-run seed: a hash of the master seed, the method name, the sigma bit
/// pattern and the replication index. Adding sweep points never changes
/// the seed of an existing one.
std::uint64_t derive_run_seed(std::uint64_t master_seed, MethodKind method, double sigma_s, std::uint32_t replication);

/// All (method, sigma, replication) points in output order.
std::vector<SweepPoint> sweep_points(const ScenarioConfig& config);

struct SweepOptions {
  /// Event trace of every run, written sequentially in output order.
  std::ostream* trace = nullptr;
  /// Called after each finished run with (finished, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<RunResult> runs;  // parallel to points
};

/// Runs every point, on config.threads worker threads unless tracing.
SweepResult run_sweep(const ScenarioConfig& config, const SweepOptions& options = {});

struct AggregateRow {
  MethodKind method = MethodKind::TwtPlain;
  double sigma_s = 0.0;
  std::size_t replications = 0;
  MetricStats frames_delivered;
  MetricStats energy_per_frame;
  MetricStats channel_time_per_frame;
  MetricStats delay_per_frame;
  MetricStats misses;
};

/// One row per (method, sigma) in sweep order. Runs that delivered nothing
/// are left out of the per-frame metrics.
std::vector<AggregateRow> aggregate(const SweepResult& sweep);

void write_config_header(std::ostream& out, const ScenarioConfig& config);
void write_raw_csv(std::ostream& out, const ScenarioConfig& config, const SweepResult& sweep);
void write_aggregate_csv(std::ostream& out, const ScenarioConfig& config, const std::vector<AggregateRow>& rows);
/// Whole-run sensor energy (including doze outside the per-frame windows)
/// and saturated-station diagnostics.
void write_energy_report(std::ostream& out, const ScenarioConfig& config, const SweepResult& sweep);

struct SweepFiles {
  std::filesystem::path raw;
  std::filesystem::path aggregate;
  std::filesystem::path energy;
};

/// Writes raw.csv, aggregate.csv and energy_report.csv into `dir`,
/// creating it if needed. Throws IoError.
SweepFiles write_sweep_outputs(const std::filesystem::path& dir, const ScenarioConfig& config,
                               const SweepResult& sweep);

}  // namespace wurba
