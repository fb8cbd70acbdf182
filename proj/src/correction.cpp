#include "ttclab/correction.hpp"

#include <cmath>
#include <stdexcept>

#include "ttclab/sampler.hpp"

namespace ttclab {

namespace {
constexpr double kLevelTol = 1e-12;
}

const char* to_string(CorrectionMode mode) {
  switch (mode) {
    case CorrectionMode::Baseline: return "baseline";
    case CorrectionMode::SinglePoint: return "single-point";
    case CorrectionMode::PathWise: return "path-wise";
    case CorrectionMode::Sink: return "sink";
  }
  return "?";
}

CorrectionMode correction_mode_from_string(const std::string& s) {
  if (s == "baseline") return CorrectionMode::Baseline;
  if (s == "single-point") return CorrectionMode::SinglePoint;
  if (s == "path-wise") return CorrectionMode::PathWise;
  if (s == "sink") return CorrectionMode::Sink;
  throw std::invalid_argument("correction: unknown mode '" + s + "'");
}

bool CorrectionConfig::applies_at(double tau) const {
  if (mode != CorrectionMode::PathWise && mode != CorrectionMode::SinglePoint) return false;
  for (double lv : levels) {
    if (std::abs(lv - tau) <= kLevelTol) return true;
  }
  return false;
}

void CorrectionConfig::validate(const NoiseSchedule& schedule) const {
  if (sink_lambda < 0.0 || sink_lambda > 1.0) {
    throw std::invalid_argument("correction: sink_lambda outside [0, 1]");
  }
  switch (mode) {
    case CorrectionMode::Baseline:
    case CorrectionMode::Sink:
      if (!levels.empty()) {
        throw std::invalid_argument("correction: levels only apply to single-point/path-wise");
      }
      return;
    case CorrectionMode::SinglePoint:
      if (levels.size() != 1) {
        throw std::invalid_argument("correction: single-point takes exactly one level");
      }
      break;
    case CorrectionMode::PathWise:
      break;  // any subset, possibly empty (degenerates to baseline)
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!schedule.contains(levels[i])) {
      throw std::invalid_argument("correction: level " + std::to_string(levels[i]) +
                                  " is not a schedule member");
    }
    if (levels[i] >= schedule.top() - kLevelTol) {
      throw std::invalid_argument("correction: corrected levels must sit strictly below "
                                  "the top level");
    }
    for (std::size_t j = i + 1; j < levels.size(); ++j) {
      if (std::abs(levels[i] - levels[j]) <= kLevelTol) {
        throw std::invalid_argument("correction: duplicate corrected level");
      }
    }
  }
}

int CorrectionConfig::per_chunk_nfe(const NoiseSchedule& schedule) const {
  int n = schedule.size();
  if (mode == CorrectionMode::PathWise) n += static_cast<int>(levels.size());
  return n;
}

CorrectionConfig CorrectionConfig::baseline() { return {}; }

CorrectionConfig CorrectionConfig::path_wise(std::vector<double> levels) {
  CorrectionConfig c;
  c.mode = CorrectionMode::PathWise;
  c.levels = std::move(levels);
  return c;
}

CorrectionConfig CorrectionConfig::single_point(double level) {
  CorrectionConfig c;
  c.mode = CorrectionMode::SinglePoint;
  c.levels = {level};
  return c;
}

CorrectionConfig CorrectionConfig::sink(double lambda) {
  CorrectionConfig c;
  c.mode = CorrectionMode::Sink;
  c.sink_lambda = lambda;
  return c;
}

ChunkContext sink_augment(const ChunkContext& ctx, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw std::invalid_argument("sink_augment: lambda outside [0, 1]");
  }
  ChunkContext out = ctx;
  out.sink_lambda_ = lambda;
  return out;
}

Vec pathwise_correct_step(const Denoiser& denoiser, const WorldSpec& world,
                          const ChunkContext& ctx, const Vec& x0_prev, double tau_c,
                          ChunkRng& rng, std::vector<StepTrace>& traces) {
  const ChunkPriors priors = make_chunk_priors(world, ctx);

  // Phase A: renoise the incoming prediction and denoise under the
  // reference conditioning.
  auto [eps_a, id_a] = rng.draw(x0_prev.size());
  const Vec x_c = forward_diffuse(x0_prev, eps_a, tau_c);
  Vec x0_c = denoiser.predict(priors.reference, x_c, tau_c);
  traces.push_back({tau_c, ContextTag::Reference, x0_c, {id_a}});

  // Phase B: renoise the corrected prediction and denoise under the
  // evolving conditioning, which restores continuity with the ongoing path.
  auto [eps_b, id_b] = rng.draw(x0_prev.size());
  const Vec x_t = forward_diffuse(x0_c, eps_b, tau_c);
  Vec x0_f = denoiser.predict(priors.contextual(), x_t, tau_c);
  traces.push_back({tau_c, priors.contextual_tag(), x0_f, {id_b}});
  return x0_f;
}

}  // namespace ttclab
