#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ttclab/correction.hpp"
#include "ttclab/metrics.hpp"
#include "ttclab/ttx.hpp"
#include "ttclab/world.hpp"

namespace ttclab {

/// Error while reading a scenario config. `line` is the 1-based source line
/// the problem was found on (0 when it has no single line, e.g. validation
/// of the assembled scenario).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message, int line = 0);
  int line() const { return line_; }

 private:
  int line_;
};

/// Everything one run needs: the world, the sampling schedule, the drift
/// source (a miscalibrated denoiser), the correction strategy, optional
/// test-time scaling / optimization, metric settings, and run sizes.
struct Scenario {
  std::string name = "unnamed";
  std::vector<double> schedule_levels = {1.0, 0.75, 0.5, 0.25};
  WorldSpec world = make_default_world();

  // Drift source: the denoiser is wrapped as gain * u + bias. gain = 1 and
  // zero bias leave the exact denoiser untouched.
  double drift_gain = 1.0;
  Vec drift_bias;  // empty = zero

  CorrectionConfig correction = CorrectionConfig::baseline();

  // Test-time scaling (candidate selection). Requires baseline correction.
  TtsMode tts_mode = TtsMode::None;
  int tts_n = 1;
  RewardKind tts_reward = RewardKind::DriftPenalty;

  // Test-time optimization (adapter fine-tuning before the rollout).
  bool tto_enabled = false;
  RewardKind tto_reward = RewardKind::Reconstruction;
  int tto_rank = 2;
  int tto_steps = 200;
  double tto_step_size = 1e-4;
  double tto_proximal_weight = 0.0;
  int tto_horizon = 1;  // chunks per training evaluation (self-conditioned)

  // Run sizes.
  int n_chunks = 30;
  int n_seeds = 200;
  int window = 3;

  MetricsConfig metrics;

  NoiseSchedule schedule() const;

  /// The denoiser this scenario runs: the exact (mixture-aware) posterior
  /// mean, wrapped in the gain/bias miscalibration when one is configured.
  DenoiserPtr build_denoiser() const;

  /// Throws ConfigError on any inconsistency (bad schedule, correction
  /// levels off the schedule, drift bias of the wrong size, test-time
  /// scaling combined with correction, degenerate run sizes, ...).
  void validate() const;
};

/// Parses the INI-style scenario grammar (see README). Unknown sections or
/// keys, duplicate keys, and malformed values raise ConfigError with the
/// offending line number. The assembled scenario is validated before it is
/// returned.
Scenario parse_scenario(const std::string& text);

/// parse_scenario over the contents of `path`.
Scenario load_scenario_file(const std::string& path);

/// Canonical text form: fixed key order, shortest round-trip number
/// formatting. parse_scenario(serialize_scenario(s)) reproduces s exactly.
std::string serialize_scenario(const Scenario& s);

/// FNV-1a (64-bit) over the canonical text form.
std::uint64_t scenario_hash(const Scenario& s);

/// scenario_hash rendered as 16 hex digits.
std::string scenario_hash_hex(const Scenario& s);

/// Built-in study presets, all on the same drifting world (gain 1.02):
/// baseline, ttc, single-point, sink, bon, sop, tto-rec, tto-sem.
std::vector<std::string> preset_names();
Scenario preset_scenario(const std::string& name);

}  // namespace ttclab
