#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "wurba/config.hpp"
#include "wurba/sweep.hpp"

using namespace wurba;

namespace {

std::string raw_csv(const ScenarioConfig& c) {
  std::ostringstream out;
  write_raw_csv(out, c, run_sweep(c));
  return out.str();
}

ScenarioConfig small_sweep() {
  ScenarioConfig c;
  c.frames_per_run = 10;
  c.replications = 2;
  c.sigma_list_s = {0.001, 0.01};
  return c;
}

}  // namespace

TEST_CASE("empty config gives the defaults") {
  const auto c = parse_config("");
  CHECK(c.saturated_stations == 10);
  CHECK(c.sensors == 10);
  CHECK(c.sigma_list_s == std::vector<double>{0.001, 0.003, 0.01, 0.03, 0.1});
  CHECK(c.methods.size() == 4);
  CHECK(c.replications == 10);
  CHECK(c.frames_per_run == 100);
  CHECK(c.timing.data == microseconds(1480));
  CHECK(c.wur_rate == DataRate::LDR);
  CHECK(sweep_points(c).size() == 200);
}

TEST_CASE("settings and comments") {
  const auto c = parse_config("# comment\nsensors = 4  # trailing\nsigma_list = [0.002, 0.02]\nmethods = wur_cts\n");
  CHECK(c.sensors == 4);
  CHECK(c.sigma_list_s == std::vector<double>{0.002, 0.02});
  CHECK(c.methods == std::vector<MethodKind>{MethodKind::WurCts});
}

TEST_CASE("bad settings are rejected with the key named") {
  CHECK_THROWS_WITH_AS(parse_config("no_such_key = 1"), doctest::Contains("no_such_key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("sigma_list = 0.001, -0.5"), doctest::Contains("sigma_list"), ConfigError);
  CHECK_THROWS_AS(parse_config("sensors = ten"), ConfigError);
  CHECK_THROWS_AS(parse_config("sensors = 0"), ConfigError);
  CHECK_THROWS_AS(parse_config("sensors"), ConfigError);
  CHECK_THROWS_AS(parse_config("methods = twt_fancy"), ConfigError);
  CHECK_THROWS_AS(parse_config("cw_min = 12"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/dir/config.txt"), IoError);
}

TEST_CASE("echoed configuration parses back to itself") {
  auto c = parse_config("sensors = 3\nseed = 99\nsigma_list = 0.0005, 0.25\np_pcr_switch_on_mw = 12.5\nwur_rate = hdr\n");
  std::string text;
  for (const auto& [k, v] : config_entries(c)) text += k + " = " + v + "\n";
  const auto back = parse_config(text);
  CHECK(config_entries(back) == config_entries(c));
  std::set<std::string> keys;
  for (const auto& [k, v] : config_entries(c)) keys.insert(k);
  CHECK(keys.size() == config_keys().size());
}

TEST_CASE("run seeds do not move when sigma points are added") {
  ScenarioConfig a;
  a.sigma_list_s = {0.001, 0.01};
  ScenarioConfig b = a;
  b.sigma_list_s = {0.0005, 0.001, 0.003, 0.01};
  const auto pa = sweep_points(a);
  const auto pb = sweep_points(b);
  for (const auto& p : pa) {
    const auto it = std::find_if(pb.begin(), pb.end(), [&](const SweepPoint& q) {
      return q.method == p.method && q.sigma_s == p.sigma_s && q.replication == p.replication;
    });
    REQUIRE(it != pb.end());
    CHECK(it->seed == p.seed);
  }
  std::set<std::uint64_t> seeds;
  for (const auto& p : pb) seeds.insert(p.seed);
  CHECK(seeds.size() == pb.size());
  CHECK(derive_run_seed(1, MethodKind::TwtPlain, 0.001, 0) != derive_run_seed(2, MethodKind::TwtPlain, 0.001, 0));
}

TEST_CASE("raw CSV layout") {
  const auto c = small_sweep();
  const auto csv = raw_csv(c);
  std::istringstream in(csv);
  std::string line;
  std::size_t header_lines = 0;
  std::size_t rows = 0;
  std::string header;
  while (std::getline(in, line)) {
    if (line.starts_with("#")) {
      ++header_lines;
    } else if (header.empty()) {
      header = line;
    } else {
      ++rows;
    }
  }
  CHECK(header ==
        "method,sigma_s,replication,frames_delivered,energy_per_frame_J,channel_time_per_frame_s,"
        "delay_per_frame_s,misses");
  CHECK(header_lines == config_keys().size() - 1);
  CHECK(rows == 4 * 2 * 2);
}

TEST_CASE("the reproducibility header re-creates the run") {
  const auto c = small_sweep();
  std::ostringstream head;
  write_config_header(head, c);
  std::istringstream in(head.str());
  std::string text;
  std::string line;
  while (std::getline(in, line)) {
    REQUIRE(line.starts_with("# "));
    text += line.substr(2) + "\n";
  }
  CHECK(raw_csv(parse_config(text)) == raw_csv(c));
}

TEST_CASE("same seed gives identical CSV regardless of thread count") {
  auto c = small_sweep();
  const auto single = raw_csv(c);
  CHECK(raw_csv(c) == single);
  c.threads = 4;
  CHECK(raw_csv(c) == single);
  c.seed = 2;
  CHECK(raw_csv(c) != single);
}

TEST_CASE("aggregate rows") {
  const auto c = small_sweep();
  const auto sweep = run_sweep(c);
  const auto rows = aggregate(sweep);
  REQUIRE(rows.size() == 8);
  for (const auto& r : rows) {
    CHECK(r.replications == 2);
    CHECK(r.energy_per_frame.count == 2);
    CHECK(r.energy_per_frame.ci95.has_value());
    CHECK(r.frames_delivered.mean == 10.0);
  }
  // Aggregate mean equals the mean of the matching raw runs.
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double m = (sweep.runs[2 * i].energy_per_frame_j + sweep.runs[2 * i + 1].energy_per_frame_j) / 2;
    CHECK(rows[i].energy_per_frame.mean == doctest::Approx(m));
  }
}

TEST_CASE("output files") {
  const auto dir = std::filesystem::temp_directory_path() / "wurba_harness_test";
  std::filesystem::remove_all(dir);
  const auto c = small_sweep();
  const auto files = write_sweep_outputs(dir, c, run_sweep(c));
  CHECK(std::filesystem::file_size(files.raw) > 0);
  CHECK(std::filesystem::file_size(files.aggregate) > 0);
  CHECK(std::filesystem::file_size(files.energy) > 0);
  std::filesystem::remove_all(dir);
  { std::ofstream blocker(dir); }
  CHECK_THROWS_AS(write_sweep_outputs(dir / "sub", c, run_sweep(c)), IoError);
  std::filesystem::remove_all(dir);
}
