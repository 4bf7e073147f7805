#include "wurba/sweep.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "wurba/config.hpp"

namespace wurba {

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.12g}", v);
}

std::string ci_field(const MetricStats& s) { return s.ci95 ? num(*s.ci95) : std::string(); }

}  // namespace

std::uint64_t derive_run_seed(std::uint64_t master_seed, MethodKind method, double sigma_s,
                              std::uint32_t replication) {
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ fnv1a(to_string(method)));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(sigma_s));
  h = mix64(h ^ replication);
  return h;
}

std::vector<SweepPoint> sweep_points(const ScenarioConfig& config) {
  std::vector<SweepPoint> points;
  for (MethodKind m : config.methods) {
    for (double s : config.sigma_list_s) {
      for (std::uint32_t r = 0; r < config.replications; ++r) {
        points.push_back({m, s, r, derive_run_seed(config.seed, m, s, r)});
      }
    }
  }
  return points;
}

SweepResult run_sweep(const ScenarioConfig& config, const SweepOptions& options) {
  config.validate();
  SweepResult result;
  result.points = sweep_points(config);
  result.runs.resize(result.points.size());
  const std::size_t total = result.points.size();

  auto run_one = [&](std::size_t i, std::ostream* trace) {
    const SweepPoint& p = result.points[i];
    RunOptions run_options;
    run_options.trace = trace;
    RunResult r = run_method(config, p.method, from_seconds(p.sigma_s), p.seed, run_options);
    r.sigma_s = p.sigma_s;
    result.runs[i] = std::move(r);
  };

  const unsigned workers = options.trace != nullptr ? 1u : std::max(1u, config.threads);
  if (workers == 1) {
    for (std::size_t i = 0; i < total; ++i) {
      if (options.trace != nullptr) {
        const SweepPoint& p = result.points[i];
        *options.trace << fmt::format("# run method={} sigma_s={} replication={} seed={}\n", to_string(p.method),
                                      p.sigma_s, p.replication, p.seed);
      }
      run_one(i, options.trace);
      if (options.progress) options.progress(i + 1, total);
    }
    return result;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> finished{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::mutex progress_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < total; i = next++) {
        try {
          run_one(i, nullptr);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = total;
          return;
        }
        const std::size_t done = ++finished;
        if (options.progress) {
          std::lock_guard lock(progress_mutex);
          options.progress(done, total);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return result;
}

std::vector<AggregateRow> aggregate(const SweepResult& sweep) {
  std::vector<AggregateRow> rows;
  std::size_t i = 0;
  while (i < sweep.points.size()) {
    std::size_t j = i;
    while (j < sweep.points.size() && sweep.points[j].method == sweep.points[i].method &&
           sweep.points[j].sigma_s == sweep.points[i].sigma_s) {
      ++j;
    }
    std::vector<double> delivered, energy, channel, delay, misses;
    for (std::size_t k = i; k < j; ++k) {
      const RunResult& r = sweep.runs[k];
      delivered.push_back(static_cast<double>(r.frames_delivered));
      misses.push_back(static_cast<double>(r.misses));
      if (r.frames_delivered == 0) continue;
      energy.push_back(r.energy_per_frame_j);
      channel.push_back(r.channel_time_per_frame_s);
      delay.push_back(r.delay_per_frame_s);
    }
    AggregateRow row;
    row.method = sweep.points[i].method;
    row.sigma_s = sweep.points[i].sigma_s;
    row.replications = j - i;
    row.frames_delivered = summarize(delivered);
    row.energy_per_frame = summarize(energy);
    row.channel_time_per_frame = summarize(channel);
    row.delay_per_frame = summarize(delay);
    row.misses = summarize(misses);
    rows.push_back(row);
    i = j;
  }
  return rows;
}

void write_config_header(std::ostream& out, const ScenarioConfig& config) {
  for (const auto& [key, value] : config_entries(config)) {
    // Worker count never changes results, so it stays out of the output bytes.
    if (key == "threads") continue;
    out << "# " << key << " = " << value << '\n';
  }
}

void write_raw_csv(std::ostream& out, const ScenarioConfig& config, const SweepResult& sweep) {
  write_config_header(out, config);
  out << "method,sigma_s,replication,frames_delivered,energy_per_frame_J,channel_time_per_frame_s,"
         "delay_per_frame_s,misses\n";
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    const SweepPoint& p = sweep.points[i];
    const RunResult& r = sweep.runs[i];
    out << fmt::format("{},{},{},{},{},{},{},{}\n", to_string(p.method), num(p.sigma_s), p.replication,
                       r.frames_delivered, num(r.energy_per_frame_j), num(r.channel_time_per_frame_s),
                       num(r.delay_per_frame_s), r.misses);
  }
}

void write_aggregate_csv(std::ostream& out, const ScenarioConfig& config, const std::vector<AggregateRow>& rows) {
  write_config_header(out, config);
  out << "method,sigma_s,replications,"
         "frames_delivered_mean,frames_delivered_ci95,"
         "energy_per_frame_J_mean,energy_per_frame_J_sd,energy_per_frame_J_ci95,"
         "channel_time_per_frame_s_mean,channel_time_per_frame_s_sd,channel_time_per_frame_s_ci95,"
         "delay_per_frame_s_mean,delay_per_frame_s_sd,delay_per_frame_s_ci95,"
         "misses_mean,misses_ci95\n";
  for (const AggregateRow& row : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(row.method), num(row.sigma_s),
                       row.replications, num(row.frames_delivered.mean), ci_field(row.frames_delivered),
                       num(row.energy_per_frame.mean), num(row.energy_per_frame.sd), ci_field(row.energy_per_frame),
                       num(row.channel_time_per_frame.mean), num(row.channel_time_per_frame.sd),
                       ci_field(row.channel_time_per_frame), num(row.delay_per_frame.mean),
                       num(row.delay_per_frame.sd), ci_field(row.delay_per_frame), num(row.misses.mean),
                       ci_field(row.misses));
  }
}

void write_energy_report(std::ostream& out, const ScenarioConfig& config, const SweepResult& sweep) {
  write_config_header(out, config);
  out << "method,sigma_s,replication,simulated_time_s,sensor_energy_total_J,reserved_s,transaction_s,collision_s,"
         "trigger_attempts,saturated_successes,saturated_failures,events\n";
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    const SweepPoint& p = sweep.points[i];
    const RunResult& r = sweep.runs[i];
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(p.method), num(p.sigma_s), p.replication,
                       num(r.simulated_time_s), num(r.sensor_energy_total_j), num(to_seconds(r.channel.reserved)),
                       num(to_seconds(r.channel.transaction)), num(to_seconds(r.channel.collision)),
                       r.trigger_attempts, r.saturated_successes, r.saturated_failures, r.events);
  }
}

SweepFiles write_sweep_outputs(const std::filesystem::path& dir, const ScenarioConfig& config,
                               const SweepResult& sweep) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
  SweepFiles files{dir / "raw.csv", dir / "aggregate.csv", dir / "energy_report.csv"};
  auto write = [](const std::filesystem::path& path, auto&& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    body(out);
    out.flush();
    if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
  };
  write(files.raw, [&](std::ostream& o) { write_raw_csv(o, config, sweep); });
  write(files.aggregate, [&](std::ostream& o) { write_aggregate_csv(o, config, aggregate(sweep)); });
  write(files.energy, [&](std::ostream& o) { write_energy_report(o, config, sweep); });
  return files;
}

}  // namespace wurba
