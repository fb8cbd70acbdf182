#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ttclab/config.hpp"
#include "ttclab/metrics.hpp"
#include "ttclab/stats.hpp"

namespace ttclab {

/// One scenario executed over a paired seed set, with per-seed metric rows
/// and per-metric aggregates.
struct RunManifest {
  std::string scenario_name;
  std::string scenario_hash;  // 16 hex digits of the canonical config text
  std::string scenario_text;  // canonical config text, for provenance
  std::uint64_t base_seed = 0;
  int n_chunks = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<DriftReport> rows;  // one per seed, same order
  std::map<std::string, Summary> aggregates;
  double wall_time_sec = 0.0;
};

/// Seed for paired row i of a study: mix_key(base_seed, i). Two scenarios
/// run at the same base seed are paired row for row.
std::vector<std::uint64_t> paired_seeds(std::uint64_t base_seed, int n_seeds);

/// The rollout for one seed under a scenario, honoring its switches:
/// adapter fine-tuning first when test-time optimization is enabled,
/// candidate selection when test-time scaling is on, otherwise a plain
/// (possibly corrected) rollout.
RolloutRecord scenario_rollout(const Scenario& s, std::uint64_t seed);

/// scenario_rollout + metrics over the full paired seed set.
RunManifest run_scenario(const Scenario& s, std::uint64_t base_seed);

/// Fixed column order for rows.csv / summary.csv / aggregates.
const std::vector<std::string>& metric_columns();
double metric_value(const DriftReport& r, const std::string& column);

/// Writes manifest.json, rows.csv, summary.csv, and scenario.ini to `dir`
/// (created if needed).
void write_manifest(const RunManifest& m, const std::string& dir);

/// Reads a manifest written by write_manifest. Accepts the manifest.json
/// path or the directory containing it.
RunManifest read_manifest_file(const std::string& path);

/// Paired per-metric comparison: Wilcoxon signed-rank on row-for-row
/// differences. Seed lists must match exactly.
struct MetricComparison {
  std::string metric;
  Summary a;
  Summary b;
  WilcoxonResult test;
  std::string direction;  // "a_lower" | "b_lower" | "tie"
  int n_pairs = 0;        // pairs where both sides are finite
};

struct ComparisonReport {
  std::string name_a;
  std::string name_b;
  std::vector<MetricComparison> metrics;
};

ComparisonReport compare_manifests(const RunManifest& a, const RunManifest& b);

/// Plain-text table of a comparison.
std::string render_comparison(const ComparisonReport& rep);

/// Writes compare.json and compare.txt to `dir`.
void write_comparison(const ComparisonReport& rep, const std::string& dir);

/// Path-wise correction ladder over the base scenario: one variant per
/// subset of the sub-top schedule levels (the empty subset is the
/// baseline), ordered by subset size then by enumeration order.
std::vector<Scenario> sweep_correction_ladder(const Scenario& base);

}  // namespace ttclab
