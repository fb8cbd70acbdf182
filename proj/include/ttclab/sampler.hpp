#pragma once

#include <cstdint>

#include "ttclab/context.hpp"
#include "ttclab/correction.hpp"
#include "ttclab/schedule.hpp"
#include "ttclab/world.hpp"

namespace ttclab {

/// Conditioning resolved for one chunk: the evolving prior (most recent
/// window chunk), the reference prior (frozen chunk 0), and — for sink
/// contexts — their blend. For chunk 0 all of them fall back to the world's
/// init distribution.
struct ChunkPriors {
  ConditionalPrior evolving;
  ConditionalPrior reference;
  ConditionalPrior blended;  // equals evolving unless the context is sink-augmented
  bool sink = false;

  const ConditionalPrior& contextual() const { return sink ? blended : evolving; }
  ContextTag contextual_tag() const {
    return sink ? ContextTag::SinkAugmented : ContextTag::Evolving;
  }
};

ChunkPriors make_chunk_priors(const WorldSpec& world, const ChunkContext& ctx);

/// Few-step stochastic sampler for one chunk, with optional correction.
/// Draw order per chunk: initial noise, then one fresh draw per transition
/// (two per path-wise corrected level). Every denoiser call appends one
/// StepTrace. The schedule's top level must be 1 (generation starts from
/// pure noise).
GeneratedChunk generate_chunk(const Denoiser& denoiser, const WorldSpec& world,
                              const ChunkContext& ctx, const NoiseSchedule& schedule,
                              const CorrectionConfig& correction, ChunkRng& rng);

/// Baseline few-step stochastic generation (no correction).
GeneratedChunk generate_chunk_stochastic(const Denoiser& denoiser, const WorldSpec& world,
                                         const ChunkContext& ctx,
                                         const NoiseSchedule& schedule, ChunkRng& rng);

/// Deterministic sampler: one initial noise draw, then Euler steps of the
/// probability-flow field v = (x0_hat - x_tau) / tau down the schedule and
/// a final step to tau = 0.
GeneratedChunk generate_chunk_ode(const Denoiser& denoiser, const WorldSpec& world,
                                  const ChunkContext& ctx, const NoiseSchedule& schedule,
                                  ChunkRng& rng);

/// Autoregressive rollout of n_chunks chunks. Chunk t consumes the
/// substream keyed (seed, t), so strategies that share a seed see identical
/// noise where their draw patterns coincide. The context window holds at
/// most `window` recent chunks; the reference freezes at chunk 0.
RolloutRecord rollout(const Denoiser& denoiser, const WorldSpec& world,
                      const NoiseSchedule& schedule, const CorrectionConfig& correction,
                      int n_chunks, std::uint64_t seed, int window = 3);

/// Splits a chunk vector into its frames_per_chunk frames.
std::vector<Vec> split_frames(const Vec& chunk, int frame_dim, int frames_per_chunk);

}  // namespace ttclab
