#include "ttclab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"
#include "ttclab/sampler.hpp"
#include "ttclab/ttx.hpp"

namespace ttclab {

namespace {

using json = nlohmann::json;

constexpr std::uint64_t kTtoTrainSalt = 0x7702A11C4042ULL;
constexpr std::uint64_t kTtoAdapterSalt = 0x7702ADA9B00ULL;
constexpr std::uint64_t kTtoEvalSalt = 0x7702E7A15EEDULL;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::optional<FrameEncoder> chunk_reward_encoder(const Scenario& s, RewardKind kind) {
  if (kind != RewardKind::Semantic) return std::nullopt;
  // Reward embeddings act on whole chunks, so the encoder's input is the
  // chunk dimension (the metric encoder works per frame instead).
  return FrameEncoder::fixed_nonlinear(s.world.chunk_dim(), s.metrics.embed_dim,
                                       s.metrics.encoder_seed);
}

RolloutRecord tto_rollout(const Scenario& s, std::uint64_t seed) {
  const NoiseSchedule sched = s.schedule();
  const DenoiserPtr inner = s.build_denoiser();

  // Training material comes from a salted stream so it is independent of
  // the evaluation rollout at this seed: an anchor chunk drawn as a fresh
  // chunk 0, which then also conditions every training generation.
  RngStream train_stream(mix_key(seed, kTtoTrainSalt));
  ChunkContext train_ctx(s.window);
  ChunkRng anchor_rng(train_stream.substream(0));
  const GeneratedChunk anchor =
      generate_chunk_stochastic(*inner, s.world, train_ctx, sched, anchor_rng);

  RewardSpec reward;
  reward.kind = s.tto_reward;
  reward.reference = anchor.chunk;
  reward.encoder = chunk_reward_encoder(s, s.tto_reward);
  train_ctx.push(anchor.chunk);

  AdapterSpec adapter =
      AdapterSpec::seeded(s.world.chunk_dim(), s.tto_rank, mix_key(seed, kTtoAdapterSalt));
  adapter.step_size = s.tto_step_size;
  adapter.steps = s.tto_steps;
  adapter.proximal_weight = s.tto_proximal_weight;
  adapter.horizon = s.tto_horizon;

  const TtoResult trained = tto_finetune(inner, std::move(adapter), reward, s.world, train_ctx,
                                         sched, train_stream.substream(1));
  const DenoiserPtr adapted = make_adapted_denoiser(inner, trained.adapter);
  // The post-adaptation rollout draws from its own noise lane. Reusing the
  // un-adapted scenario's streams would bit-twin the two experiments, and a
  // paired comparison between twins flags adapter effects all the way down
  // to machine precision — per-seed pairing against other scenarios should
  // compare independent runs of the same seed-indexed experiment instead.
  return rollout(*adapted, s.world, sched, s.correction, s.n_chunks, mix_key(seed, kTtoEvalSalt),
                 s.window);
}

json json_num(double v) {
  if (std::isfinite(v)) return json(v);
  return json(nullptr);  // NaN / inf have no JSON literal
}

double num_or_nan(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

json json_trace(const std::vector<double>& xs) {
  json arr = json::array();
  for (double x : xs) arr.push_back(json_num(x));
  return arr;
}

std::vector<double> trace_from_json(const json& arr) {
  std::vector<double> out;
  out.reserve(arr.size());
  for (const json& x : arr) out.push_back(num_or_nan(x));
  return out;
}

std::string csv_num(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("short write on '" + path + "'");
}

}  // namespace

std::vector<std::uint64_t> paired_seeds(std::uint64_t base_seed, int n_seeds) {
  if (n_seeds < 1) throw std::invalid_argument("paired_seeds: n_seeds must be >= 1");
  std::vector<std::uint64_t> seeds;
  seeds.reserve(static_cast<std::size_t>(n_seeds));
  for (int i = 0; i < n_seeds; ++i) {
    seeds.push_back(mix_key(base_seed, static_cast<std::uint64_t>(i)));
  }
  return seeds;
}

RolloutRecord scenario_rollout(const Scenario& s, std::uint64_t seed) {
  if (s.tto_enabled) return tto_rollout(s, seed);
  const NoiseSchedule sched = s.schedule();
  const DenoiserPtr denoiser = s.build_denoiser();
  if (s.tts_mode != TtsMode::None) {
    return rollout_with_selection(*denoiser, s.world, sched, s.tts_mode, s.tts_n, s.tts_reward,
                                  chunk_reward_encoder(s, s.tts_reward), s.n_chunks, seed,
                                  s.window);
  }
  return rollout(*denoiser, s.world, sched, s.correction, s.n_chunks, seed, s.window);
}

RunManifest run_scenario(const Scenario& s, std::uint64_t base_seed) {
  s.validate();
  const auto t0 = std::chrono::steady_clock::now();

  RunManifest m;
  m.scenario_name = s.name;
  m.scenario_hash = scenario_hash_hex(s);
  m.scenario_text = serialize_scenario(s);
  m.base_seed = base_seed;
  m.n_chunks = s.n_chunks;
  m.seeds = paired_seeds(base_seed, s.n_seeds);
  m.rows.reserve(m.seeds.size());
  for (std::uint64_t seed : m.seeds) {
    m.rows.push_back(compute_drift_report(scenario_rollout(s, seed), s.metrics));
  }

  for (const std::string& column : metric_columns()) {
    std::vector<double> values;
    values.reserve(m.rows.size());
    for (const DriftReport& r : m.rows) {
      const double v = metric_value(r, column);
      if (std::isfinite(v)) values.push_back(v);
    }
    m.aggregates[column] = summarize(values);  // disabled metrics end up with n = 0
  }

  m.wall_time_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> kColumns = {
      "nfe",       "jepa_std", "jepa_diff",    "boundary",     "hist_l1",
      "hist_corr", "dynamic",  "density_mean", "density_final"};
  return kColumns;
}

double metric_value(const DriftReport& r, const std::string& column) {
  if (column == "nfe") return static_cast<double>(r.nfe);
  if (column == "jepa_std") return r.jepa_std;
  if (column == "jepa_diff") return r.jepa_diff;
  if (column == "boundary") return r.boundary;
  if (column == "hist_l1") return r.hist_l1;
  if (column == "hist_corr") return r.hist_corr;
  if (column == "dynamic") return r.dynamic;
  if (column == "density_mean") return r.density_mean;
  if (column == "density_final") return r.density_final;
  throw std::invalid_argument("metric_value: unknown column '" + column + "'");
}

void write_manifest(const RunManifest& m, const std::string& dir) {
  std::filesystem::create_directories(dir);

  json j;
  j["scenario_name"] = m.scenario_name;
  j["scenario_hash"] = m.scenario_hash;
  j["scenario_text"] = m.scenario_text;
  j["base_seed"] = m.base_seed;
  j["n_chunks"] = m.n_chunks;
  j["wall_time_sec"] = m.wall_time_sec;
  j["seeds"] = m.seeds;
  json rows = json::array();
  for (const DriftReport& r : m.rows) {
    json row;
    row["seed"] = r.seed;
    row["nfe"] = r.nfe;
    row["jepa_std"] = json_num(r.jepa_std);
    row["jepa_diff"] = json_num(r.jepa_diff);
    row["boundary"] = json_num(r.boundary);
    row["hist_l1"] = json_num(r.hist_l1);
    row["hist_corr"] = json_num(r.hist_corr);
    row["dynamic"] = json_num(r.dynamic);
    row["density_mean"] = json_num(r.density_mean);
    row["density_final"] = json_num(r.density_final);
    row["d_trace"] = json_trace(r.d_trace);
    row["density_trace"] = json_trace(r.density_trace);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  json aggs;
  for (const auto& [name, summary] : m.aggregates) {
    aggs[name] = {{"n", summary.n},
                  {"mean", json_num(summary.mean)},
                  {"stddev", json_num(summary.stddev)},
                  {"stderr", json_num(summary.stderr_mean)}};
  }
  j["aggregates"] = std::move(aggs);

  const std::filesystem::path base(dir);
  write_text_file((base / "manifest.json").string(), j.dump(2) + "\n");
  write_text_file((base / "scenario.ini").string(), m.scenario_text);

  std::ostringstream rows_csv;
  rows_csv << "seed";
  for (const std::string& column : metric_columns()) rows_csv << "," << column;
  rows_csv << "\n";
  for (const DriftReport& r : m.rows) {
    rows_csv << r.seed;
    for (const std::string& column : metric_columns()) {
      rows_csv << "," << csv_num(metric_value(r, column));
    }
    rows_csv << "\n";
  }
  write_text_file((base / "rows.csv").string(), rows_csv.str());

  std::ostringstream summary_csv;
  summary_csv << "metric,n,mean,stddev,stderr\n";
  for (const std::string& column : metric_columns()) {
    const auto it = m.aggregates.find(column);
    if (it == m.aggregates.end()) continue;
    const Summary& s = it->second;
    summary_csv << column << "," << s.n << "," << csv_num(s.mean) << "," << csv_num(s.stddev)
                << "," << csv_num(s.stderr_mean) << "\n";
  }
  write_text_file((base / "summary.csv").string(), summary_csv.str());
}

RunManifest read_manifest_file(const std::string& path) {
  std::filesystem::path p(path);
  if (std::filesystem::is_directory(p)) p /= "manifest.json";
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open '" + p.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("malformed manifest '" + p.string() + "': " + e.what());
  }

  RunManifest m;
  m.scenario_name = j.at("scenario_name").get<std::string>();
  m.scenario_hash = j.at("scenario_hash").get<std::string>();
  m.scenario_text = j.at("scenario_text").get<std::string>();
  m.base_seed = j.at("base_seed").get<std::uint64_t>();
  m.n_chunks = j.at("n_chunks").get<int>();
  m.wall_time_sec = j.at("wall_time_sec").get<double>();
  m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  for (const json& row : j.at("rows")) {
    DriftReport r;
    r.seed = row.at("seed").get<std::uint64_t>();
    r.nfe = row.at("nfe").get<long long>();
    r.jepa_std = num_or_nan(row.at("jepa_std"));
    r.jepa_diff = num_or_nan(row.at("jepa_diff"));
    r.boundary = num_or_nan(row.at("boundary"));
    r.hist_l1 = num_or_nan(row.at("hist_l1"));
    r.hist_corr = num_or_nan(row.at("hist_corr"));
    r.dynamic = num_or_nan(row.at("dynamic"));
    r.density_mean = num_or_nan(row.at("density_mean"));
    r.density_final = num_or_nan(row.at("density_final"));
    r.d_trace = trace_from_json(row.at("d_trace"));
    r.density_trace = trace_from_json(row.at("density_trace"));
    m.rows.push_back(std::move(r));
  }
  for (const auto& [name, agg] : j.at("aggregates").items()) {
    Summary s;
    s.n = agg.at("n").get<int>();
    s.mean = num_or_nan(agg.at("mean"));
    s.stddev = num_or_nan(agg.at("stddev"));
    s.stderr_mean = num_or_nan(agg.at("stderr"));
    m.aggregates[name] = s;
  }
  return m;
}

ComparisonReport compare_manifests(const RunManifest& a, const RunManifest& b) {
  if (a.seeds != b.seeds) {
    throw std::invalid_argument(
        "compare: manifests must share the same seed list (same base seed and seed count)");
  }
  if (a.rows.size() != a.seeds.size() || b.rows.size() != b.seeds.size()) {
    throw std::invalid_argument("compare: manifest rows do not match the seed list");
  }

  ComparisonReport rep;
  rep.name_a = a.scenario_name;
  rep.name_b = b.scenario_name;
  for (const std::string& column : metric_columns()) {
    MetricComparison mc;
    mc.metric = column;
    std::vector<double> va, vb;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      const double xa = metric_value(a.rows[i], column);
      const double xb = metric_value(b.rows[i], column);
      if (std::isfinite(xa) && std::isfinite(xb)) {
        va.push_back(xa);
        vb.push_back(xb);
      }
    }
    mc.n_pairs = static_cast<int>(va.size());
    mc.a = summarize(va);
    mc.b = summarize(vb);
    if (va.empty()) {
      mc.test = WilcoxonResult{};  // nothing to test: W = 0, p = 1
      mc.direction = "tie";
    } else {
      mc.test = wilcoxon_signed_rank(va, vb);
      double mean_diff = 0.0;
      for (std::size_t i = 0; i < va.size(); ++i) mean_diff += va[i] - vb[i];
      mean_diff /= static_cast<double>(va.size());
      mc.direction = (mc.test.n_effective == 0 || mean_diff == 0.0)
                         ? "tie"
                         : (mean_diff < 0.0 ? "a_lower" : "b_lower");
    }
    rep.metrics.push_back(std::move(mc));
  }
  return rep;
}

std::string render_comparison(const ComparisonReport& rep) {
  std::ostringstream os;
  os << "paired comparison: a = " << rep.name_a << ", b = " << rep.name_b << "\n";
  os << std::left << std::setw(14) << "metric" << std::right << std::setw(14) << "mean_a"
     << std::setw(14) << "mean_b" << std::setw(12) << "p_value" << std::setw(8) << "n"
     << "  direction\n";
  for (const MetricComparison& mc : rep.metrics) {
    os << std::left << std::setw(14) << mc.metric << std::right << std::setw(14)
       << std::setprecision(6) << mc.a.mean << std::setw(14) << mc.b.mean << std::setw(12)
       << std::setprecision(4) << mc.test.p_value << std::setw(8) << mc.n_pairs << "  "
       << mc.direction << "\n";
  }
  return os.str();
}

void write_comparison(const ComparisonReport& rep, const std::string& dir) {
  std::filesystem::create_directories(dir);
  json j;
  j["a"] = rep.name_a;
  j["b"] = rep.name_b;
  json metrics = json::array();
  for (const MetricComparison& mc : rep.metrics) {
    metrics.push_back({{"metric", mc.metric},
                       {"mean_a", json_num(mc.a.mean)},
                       {"mean_b", json_num(mc.b.mean)},
                       {"stderr_a", json_num(mc.a.stderr_mean)},
                       {"stderr_b", json_num(mc.b.stderr_mean)},
                       {"n_pairs", mc.n_pairs},
                       {"wilcoxon_statistic", json_num(mc.test.statistic)},
                       {"p_value", json_num(mc.test.p_value)},
                       {"n_effective", mc.test.n_effective},
                       {"exact", mc.test.exact},
                       {"direction", mc.direction}});
  }
  j["metrics"] = std::move(metrics);
  const std::filesystem::path base(dir);
  write_text_file((base / "compare.json").string(), j.dump(2) + "\n");
  write_text_file((base / "compare.txt").string(), render_comparison(rep));
}

std::vector<Scenario> sweep_correction_ladder(const Scenario& base) {
  const NoiseSchedule sched = base.schedule();
  std::vector<double> sub_levels;
  for (int j = 1; j < sched.size(); ++j) sub_levels.push_back(sched.at(j));
  const int m = static_cast<int>(sub_levels.size());
  if (m > 16) throw std::invalid_argument("sweep: schedule too long to enumerate level subsets");

  std::vector<unsigned> masks;
  for (unsigned mask = 0; mask < (1u << m); ++mask) masks.push_back(mask);
  std::stable_sort(masks.begin(), masks.end(), [](unsigned x, unsigned y) {
    const int px = __builtin_popcount(x), py = __builtin_popcount(y);
    return px != py ? px < py : x < y;
  });

  std::vector<Scenario> out;
  out.reserve(masks.size());
  for (unsigned mask : masks) {
    Scenario s = base;
    std::vector<double> levels;
    std::string label;
    for (int i = 0; i < m; ++i) {
      if (!(mask & (1u << i))) continue;
      levels.push_back(sub_levels[static_cast<std::size_t>(i)]);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", sub_levels[static_cast<std::size_t>(i)]);
      label += label.empty() ? buf : ("_" + std::string(buf));
    }
    if (levels.empty()) {
      s.correction = CorrectionConfig::baseline();
      s.name = base.name + "-none";
    } else {
      s.correction = CorrectionConfig::path_wise(levels);
      s.name = base.name + "-pw-" + label;
    }
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ttclab
