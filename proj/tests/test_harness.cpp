#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "ttclab/harness.hpp"
#include "ttclab/rng.hpp"

using namespace ttclab;

namespace {

Scenario small_scenario() {
  Scenario s = preset_scenario("baseline");
  s.n_chunks = 6;
  s.n_seeds = 5;
  return s;
}

bool rows_identical(const DriftReport& a, const DriftReport& b) {
  if (a.seed != b.seed || a.nfe != b.nfe) return false;
  if (a.d_trace != b.d_trace) return false;
  auto same = [](double x, double y) {
    return (std::isnan(x) && std::isnan(y)) || x == y;
  };
  return same(a.jepa_std, b.jepa_std) && same(a.jepa_diff, b.jepa_diff) &&
         same(a.boundary, b.boundary) && same(a.hist_l1, b.hist_l1) &&
         same(a.hist_corr, b.hist_corr) && same(a.dynamic, b.dynamic) &&
         same(a.density_mean, b.density_mean) && same(a.density_final, b.density_final);
}

}  // namespace

TEST_CASE("harness: paired seeds are keyed off the base seed") {
  const std::vector<std::uint64_t> seeds = paired_seeds(42, 4);
  REQUIRE(seeds.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(seeds[static_cast<std::size_t>(i)] == mix_key(42, static_cast<std::uint64_t>(i)));
  CHECK_THROWS_AS(paired_seeds(42, 0), std::invalid_argument);
}

TEST_CASE("harness: run_scenario aggregates per-seed drift rows") {
  const Scenario s = small_scenario();
  const RunManifest m = run_scenario(s, 7);
  CHECK(m.scenario_name == "baseline");
  CHECK(m.scenario_hash == scenario_hash_hex(s));
  CHECK(m.scenario_text == serialize_scenario(s));
  CHECK(m.base_seed == 7);
  CHECK(m.n_chunks == 6);
  REQUIRE(m.seeds.size() == 5);
  REQUIRE(m.rows.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(m.rows[i].seed == m.seeds[i]);

  // Baseline four-level schedule: 4 calls per chunk, 6 chunks.
  REQUIRE(m.aggregates.count("nfe") == 1);
  CHECK(m.aggregates.at("nfe").n == 5);
  CHECK(m.aggregates.at("nfe").mean == 24.0);
  for (const std::string& col : metric_columns()) {
    CAPTURE(col);
    CHECK(m.aggregates.count(col) == 1);
  }

  // Bitwise repeatable.
  const RunManifest m2 = run_scenario(s, 7);
  for (std::size_t i = 0; i < 5; ++i) CHECK(rows_identical(m.rows[i], m2.rows[i]));
}

TEST_CASE("harness: manifest disk round-trip") {
  Scenario s = small_scenario();
  s.metrics.histogram = false;  // exercise NaN (disabled metric) persistence
  const RunManifest m = run_scenario(s, 11);
  CHECK(m.aggregates.at("hist_l1").n == 0);

  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "ttclab_test_manifest";
  std::filesystem::remove_all(dir);
  write_manifest(m, dir.string());
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  CHECK(std::filesystem::exists(dir / "rows.csv"));
  CHECK(std::filesystem::exists(dir / "summary.csv"));
  CHECK(std::filesystem::exists(dir / "scenario.ini"));

  const RunManifest back = read_manifest_file((dir / "manifest.json").string());
  CHECK(back.scenario_name == m.scenario_name);
  CHECK(back.scenario_hash == m.scenario_hash);
  CHECK(back.scenario_text == m.scenario_text);
  CHECK(back.base_seed == m.base_seed);
  CHECK(back.n_chunks == m.n_chunks);
  CHECK(back.seeds == m.seeds);
  REQUIRE(back.rows.size() == m.rows.size());
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    CAPTURE(i);
    CHECK(rows_identical(back.rows[i], m.rows[i]));
  }
  CHECK(back.aggregates.at("hist_l1").n == 0);
  CHECK(back.aggregates.at("nfe").mean == m.aggregates.at("nfe").mean);

  // Directory form of the path is accepted too.
  const RunManifest back2 = read_manifest_file(dir.string());
  CHECK(back2.scenario_hash == m.scenario_hash);
  std::filesystem::remove_all(dir);
}

TEST_CASE("harness: self-comparison is a tie on every metric") {
  const Scenario s = small_scenario();
  const RunManifest m = run_scenario(s, 13);
  const ComparisonReport rep = compare_manifests(m, m);
  CHECK(rep.name_a == "baseline");
  REQUIRE(!rep.metrics.empty());
  for (const MetricComparison& c : rep.metrics) {
    CAPTURE(c.metric);
    CHECK(c.direction == "tie");
    CHECK(c.test.p_value == 1.0);
    CHECK(c.test.n_effective == 0);
    if (c.metric == "nfe") CHECK(c.n_pairs == 5);
  }
  const std::string table = render_comparison(rep);
  CHECK(table.find("jepa_diff") != std::string::npos);
  CHECK(table.find("tie") != std::string::npos);
  CHECK(table.find("baseline") != std::string::npos);

  // Different base seeds give unpaired rows: comparison is refused.
  const RunManifest other = run_scenario(s, 14);
  CHECK_THROWS_AS(compare_manifests(m, other), std::invalid_argument);
}

TEST_CASE("harness: comparison skips metrics that one side disabled") {
  const Scenario a = small_scenario();
  Scenario b = small_scenario();
  b.metrics.histogram = false;
  const RunManifest ma = run_scenario(a, 17);
  const RunManifest mb = run_scenario(b, 17);
  const ComparisonReport rep = compare_manifests(ma, mb);
  for (const MetricComparison& c : rep.metrics) {
    if (c.metric != "hist_l1" && c.metric != "hist_corr") continue;
    CHECK(c.n_pairs == 0);
    CHECK(c.direction == "tie");
  }
}

TEST_CASE("harness: correction ladder sweeps every level subset") {
  Scenario base = small_scenario();
  base.name = "ladder";
  const std::vector<Scenario> variants = sweep_correction_ladder(base);
  REQUIRE(variants.size() == 8);  // subsets of {0.75, 0.5, 0.25}

  const std::vector<std::string> names = {
      "ladder-none",         "ladder-pw-0.75",      "ladder-pw-0.5",
      "ladder-pw-0.25",      "ladder-pw-0.75_0.5",  "ladder-pw-0.75_0.25",
      "ladder-pw-0.5_0.25",  "ladder-pw-0.75_0.5_0.25"};
  const std::vector<long long> nfe_per_chunk = {4, 5, 5, 5, 6, 6, 6, 7};
  for (std::size_t i = 0; i < variants.size(); ++i) {
    CAPTURE(i);
    CHECK(variants[i].name == names[i]);
    CHECK_NOTHROW(variants[i].validate());
    const long long per_chunk = 4 + static_cast<long long>(variants[i].correction.levels.size());
    CHECK(per_chunk == nfe_per_chunk[i]);
    if (i == 0) CHECK(variants[i].correction.mode == CorrectionMode::Baseline);
    else CHECK(variants[i].correction.mode == CorrectionMode::PathWise);
  }
}

TEST_CASE("harness: scenario_rollout dispatches on the scenario switches") {
  Scenario plain = small_scenario();
  const RolloutRecord base = scenario_rollout(plain, 99);
  CHECK(base.total_nfe() == 6 * 4);

  Scenario bon = small_scenario();
  bon.tts_mode = TtsMode::BestOfN;
  bon.tts_n = 2;
  const RolloutRecord scaled = scenario_rollout(bon, 99);
  CHECK(scaled.total_nfe() == 2 * 6 * 4);

  Scenario tuned = small_scenario();
  tuned.tto_enabled = true;
  tuned.tto_steps = 3;
  tuned.tto_step_size = 1e-3;
  const RolloutRecord adapted = scenario_rollout(tuned, 99);
  CHECK(adapted.total_nfe() == 6 * 4);
  bool differs = false;
  for (std::size_t i = 0; i < base.frames.size() && !differs; ++i) {
    if ((base.frames[i] - adapted.frames[i]).cwiseAbs().maxCoeff() > 0.0) differs = true;
  }
  CHECK(differs);
}
