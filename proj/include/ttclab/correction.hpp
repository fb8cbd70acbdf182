#pragma once

#include <string>
#include <vector>

#include "ttclab/context.hpp"
#include "ttclab/schedule.hpp"
#include "ttclab/world.hpp"

namespace ttclab {

/// How generation is steered back toward the reference.
///   Baseline     — evolving context only.
///   SinglePoint  — at one level, the denoiser is conditioned on the
///                  reference instead of the evolving context (free).
///   PathWise     — at each corrected level, renoise/denoise under the
///                  reference, then renoise/denoise again under the evolving
///                  context (one extra denoiser call per corrected level).
///   Sink         — every call conditions on a fixed blend of reference and
///                  evolving prior means (free).
enum class CorrectionMode { Baseline, SinglePoint, PathWise, Sink };

const char* to_string(CorrectionMode mode);
CorrectionMode correction_mode_from_string(const std::string& s);

struct CorrectionConfig {
  CorrectionMode mode = CorrectionMode::Baseline;
  std::vector<double> levels;  // corrected levels (path-wise) or the single level
  double sink_lambda = 0.5;

  bool applies_at(double tau) const;

  /// Structural checks against a schedule: corrected levels must be schedule
  /// members strictly below the top level; single-point takes exactly one
  /// level; baseline and sink take none; sink_lambda must lie in [0, 1].
  /// Throws std::invalid_argument.
  void validate(const NoiseSchedule& schedule) const;

  /// Denoiser calls one chunk will cost under this strategy.
  int per_chunk_nfe(const NoiseSchedule& schedule) const;

  static CorrectionConfig baseline();
  static CorrectionConfig path_wise(std::vector<double> levels);
  static CorrectionConfig single_point(double level);
  static CorrectionConfig sink(double lambda);
};

/// Marks a context so that prior conditioning blends reference and evolving
/// predecessors: lambda on the reference mean, (1 - lambda) on the evolving
/// mean, at every level. lambda = 0 reproduces baseline behavior.
ChunkContext sink_augment(const ChunkContext& ctx, double lambda);

/// Path-wise corrective step at level tau_c, replacing the plain
/// renoise-and-denoise of x0_prev. Phase A renoises x0_prev with a fresh
/// draw and denoises under the reference conditioning; phase B renoises the
/// corrected prediction with another fresh draw and denoises under the
/// evolving conditioning. Appends the two trace entries (tags Reference then
/// Evolving) and returns the final prediction. Net cost: one extra denoiser
/// call versus the uncorrected transition.
Vec pathwise_correct_step(const Denoiser& denoiser, const WorldSpec& world,
                          const ChunkContext& ctx, const Vec& x0_prev, double tau_c,
                          ChunkRng& rng, std::vector<StepTrace>& traces);

}  // namespace ttclab
