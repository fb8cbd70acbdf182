#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ttclab/config.hpp"
#include "ttclab/harness.hpp"
#include "ttclab/oracles.hpp"

namespace {

using namespace ttclab;

std::string default_out() {
  const char* env = std::getenv("TTC_LAB_OUT");
  return env && *env ? env : "out";
}

Scenario load_from(const std::string& config, const std::string& preset) {
  if (config.empty() == preset.empty()) {
    throw std::runtime_error("exactly one of --config or --preset is required");
  }
  return config.empty() ? preset_scenario(preset) : load_scenario_file(config);
}

void print_manifest_summary(const RunManifest& m) {
  std::cout << "scenario " << m.scenario_name << " (hash " << m.scenario_hash << ")\n"
            << m.seeds.size() << " seeds x " << m.n_chunks << " chunks, base seed " << m.base_seed
            << ", wall " << std::fixed << std::setprecision(2) << m.wall_time_sec << "s\n";
  std::cout << std::left << std::setw(14) << "metric" << std::right << std::setw(8) << "n"
            << std::setw(16) << "mean" << std::setw(16) << "stderr" << "\n";
  std::cout.unsetf(std::ios::fixed);
  for (const std::string& column : metric_columns()) {
    const auto it = m.aggregates.find(column);
    if (it == m.aggregates.end()) continue;
    std::cout << std::left << std::setw(14) << column << std::right << std::setw(8)
              << it->second.n << std::setw(16) << std::setprecision(6) << it->second.mean
              << std::setw(16) << it->second.stderr_mean << "\n";
  }
}

int cmd_run(const std::string& config, const std::string& preset, std::uint64_t seed,
            const std::string& out) {
  const Scenario s = load_from(config, preset);
  const RunManifest m = run_scenario(s, seed);
  const std::filesystem::path dir = std::filesystem::path(out) / s.name;
  write_manifest(m, dir.string());
  print_manifest_summary(m);
  std::cout << "wrote " << (dir / "manifest.json").string() << "\n";
  return 0;
}

int cmd_sweep(const std::string& config, const std::string& preset, std::uint64_t seed,
              const std::string& out) {
  const Scenario base = load_from(config, preset);
  const std::filesystem::path root = std::filesystem::path(out) / (base.name + "-sweep");

  std::ostringstream csv;
  csv << "name,hash,per_chunk_nfe,total_nfe";
  for (const std::string& column : metric_columns()) {
    if (column != "nfe") csv << "," << column << "_mean";
  }
  csv << "\n";

  std::cout << std::left << std::setw(28) << "variant" << std::right << std::setw(10) << "nfe/chunk"
            << std::setw(12) << "jepa_std" << std::setw(12) << "jepa_diff" << std::setw(12)
            << "boundary" << "\n";
  for (const Scenario& variant : sweep_correction_ladder(base)) {
    const RunManifest m = run_scenario(variant, seed);
    write_manifest(m, (root / variant.name).string());
    const double total_nfe = m.aggregates.at("nfe").mean;
    const double per_chunk = total_nfe / variant.n_chunks;
    std::cout << std::left << std::setw(28) << variant.name << std::right << std::setw(10)
              << std::setprecision(4) << per_chunk << std::setw(12) << std::setprecision(5)
              << m.aggregates.at("jepa_std").mean << std::setw(12)
              << m.aggregates.at("jepa_diff").mean << std::setw(12)
              << m.aggregates.at("boundary").mean << "\n";
    csv << variant.name << "," << m.scenario_hash << "," << per_chunk << "," << total_nfe;
    for (const std::string& column : metric_columns()) {
      if (column == "nfe") continue;
      csv << "," << std::setprecision(17) << m.aggregates.at(column).mean;
    }
    csv << "\n";
  }

  std::filesystem::create_directories(root);
  std::ofstream f(root / "sweep.csv", std::ios::binary);
  if (!f) throw std::runtime_error("cannot write sweep.csv");
  f << csv.str();
  std::cout << "wrote " << (root / "sweep.csv").string() << "\n";
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& out) {
  const RunManifest ma = read_manifest_file(a);
  const RunManifest mb = read_manifest_file(b);
  const ComparisonReport rep = compare_manifests(ma, mb);
  std::cout << render_comparison(rep);
  if (!out.empty()) {
    write_comparison(rep, out);
    std::cout << "wrote " << (std::filesystem::path(out) / "compare.json").string() << "\n";
  }
  return 0;
}

int cmd_oracle(const std::string& out) {
  const std::vector<OracleResult> results = run_oracle_suite();
  bool all_pass = true;
  std::ostringstream report;
  for (const OracleResult& r : results) {
    report << (r.pass ? "PASS" : "FAIL") << " " << r.name << ": value " << std::setprecision(4)
           << r.value << " vs bound " << r.bound << " (" << r.detail << ")\n";
    all_pass = all_pass && r.pass;
  }
  std::cout << report.str();
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream f(std::filesystem::path(out) / "oracle.txt", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write oracle.txt");
    f << report.str();
  }
  if (!all_pass) {
    std::cerr << "error: oracle suite failed\n";
    return 1;
  }
  return 0;
}

int cmd_presets(const std::string& name, const std::string& out) {
  if (!name.empty()) {
    std::cout << serialize_scenario(preset_scenario(name));
    return 0;
  }
  for (const std::string& p : preset_names()) std::cout << p << "\n";
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    for (const std::string& p : preset_names()) {
      const std::filesystem::path path = std::filesystem::path(out) / (p + ".ini");
      std::ofstream f(path, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + path.string());
      f << serialize_scenario(preset_scenario(p));
    }
    std::cout << "wrote preset configs to " << out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chunked diffusion rollout laboratory: drift, correction, and test-time studies"};
  app.require_subcommand(1);

  std::string config, preset, name;
  std::string out = default_out();
  std::string path_a, path_b;
  std::uint64_t seed = 1;

  CLI::App* run = app.add_subcommand("run", "Run one scenario over its seed set");
  run->add_option("--config", config, "scenario config file");
  run->add_option("--preset", preset, "builtin preset name (see 'presets')");
  run->add_option("--seed", seed, "base seed (row i runs at mix_key(seed, i))");
  run->add_option("--out", out, "output directory (default: $TTC_LAB_OUT or ./out)");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Run the path-wise correction ladder (every subset of sub-top levels)");
  sweep->add_option("--config", config, "base scenario config file");
  sweep->add_option("--preset", preset, "builtin preset name");
  sweep->add_option("--seed", seed, "base seed");
  sweep->add_option("--out", out, "output directory");

  CLI::App* compare =
      app.add_subcommand("compare", "Paired Wilcoxon comparison of two run manifests");
  compare->add_option("--a", path_a, "first manifest.json (or its directory)")->required();
  compare->add_option("--b", path_b, "second manifest.json (or its directory)")->required();
  std::string compare_out;
  compare->add_option("--out", compare_out, "optional output directory for compare.json/.txt");

  CLI::App* oracle =
      app.add_subcommand("oracle", "Cross-check closed-form math against independent numerics");
  std::string oracle_out;
  oracle->add_option("--out", oracle_out, "optional output directory for oracle.txt");

  CLI::App* presets = app.add_subcommand("presets", "List presets or emit their configs");
  presets->add_option("--name", name, "print this preset's canonical config to stdout");
  std::string presets_out;
  presets->add_option("--out", presets_out, "write every preset's .ini into this directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, preset, seed, out);
    if (*sweep) return cmd_sweep(config, preset, seed, out);
    if (*compare) return cmd_compare(path_a, path_b, compare_out);
    if (*oracle) return cmd_oracle(oracle_out);
    if (*presets) return cmd_presets(name, presets_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
