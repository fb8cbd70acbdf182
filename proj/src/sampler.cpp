#include "ttclab/sampler.hpp"

#include <stdexcept>
#include <utility>

namespace ttclab {

ChunkPriors make_chunk_priors(const WorldSpec& world, const ChunkContext& ctx) {
  ChunkPriors p;
  if (ctx.empty()) {
    // Chunk 0: no predecessor exists, every conditioning falls back to the
    // init distribution (so correction strategies keep their call pattern).
    p.evolving = world.init_prior();
    p.reference = p.evolving;
  } else {
    p.evolving = conditional_prior(world, ctx.latest());
    p.reference = conditional_prior(world, ctx.reference());
  }
  if (ctx.sink_lambda()) {
    p.sink = true;
    p.blended = blend_priors(p.reference, p.evolving, *ctx.sink_lambda());
  } else {
    p.blended = p.evolving;
  }
  return p;
}

GeneratedChunk generate_chunk(const Denoiser& denoiser, const WorldSpec& world,
                              const ChunkContext& ctx_in, const NoiseSchedule& schedule,
                              const CorrectionConfig& correction, ChunkRng& rng) {
  if (schedule.top() != 1.0) {
    throw std::invalid_argument("sampler: schedule must start at tau = 1 (pure noise)");
  }
  correction.validate(schedule);

  const ChunkContext ctx = (correction.mode == CorrectionMode::Sink)
                               ? sink_augment(ctx_in, correction.sink_lambda)
                               : ctx_in;
  const ChunkPriors priors = make_chunk_priors(world, ctx);
  const Eigen::Index dim = world.chunk_dim();

  GeneratedChunk out;

  // Initial call at the top level, from pure noise.
  auto [x_init, id0] = rng.draw(dim);
  Vec x0 = denoiser.predict(priors.contextual(), x_init, schedule.top());
  out.traces.push_back({schedule.top(), priors.contextual_tag(), x0, {id0}});

  // Descend the schedule: renoise the running prediction to the next level
  // and denoise there (with correction hooks at configured levels).
  for (int j = 1; j < schedule.size(); ++j) {
    const double tau = schedule.at(j);
    if (correction.mode == CorrectionMode::PathWise && correction.applies_at(tau)) {
      x0 = pathwise_correct_step(denoiser, world, ctx, x0, tau, rng, out.traces);
      continue;
    }
    auto [eps, id] = rng.draw(dim);
    const Vec x_tau = forward_diffuse(x0, eps, tau);
    const bool swap = correction.mode == CorrectionMode::SinglePoint && correction.applies_at(tau);
    const ConditionalPrior& prior = swap ? priors.reference : priors.contextual();
    x0 = denoiser.predict(prior, x_tau, tau);
    out.traces.push_back(
        {tau, swap ? ContextTag::Reference : priors.contextual_tag(), x0, {id}});
  }

  out.chunk = std::move(x0);
  return out;
}

GeneratedChunk generate_chunk_stochastic(const Denoiser& denoiser, const WorldSpec& world,
                                         const ChunkContext& ctx,
                                         const NoiseSchedule& schedule, ChunkRng& rng) {
  return generate_chunk(denoiser, world, ctx, schedule, CorrectionConfig::baseline(), rng);
}

GeneratedChunk generate_chunk_ode(const Denoiser& denoiser, const WorldSpec& world,
                                  const ChunkContext& ctx, const NoiseSchedule& schedule,
                                  ChunkRng& rng) {
  if (schedule.top() != 1.0) {
    throw std::invalid_argument("sampler: schedule must start at tau = 1 (pure noise)");
  }
  const ChunkPriors priors = make_chunk_priors(world, ctx);

  GeneratedChunk out;
  auto [x, id0] = rng.draw(world.chunk_dim());
  for (int j = 0; j < schedule.size(); ++j) {
    const double tau = schedule.at(j);
    Vec x0 = denoiser.predict(priors.contextual(), x, tau);
    out.traces.push_back(
        {tau, priors.contextual_tag(), x0, j == 0 ? std::vector<int>{id0} : std::vector<int>{}});
    const Vec v = velocity_from_prediction(x, x0, tau);
    const double tau_next = (j + 1 < schedule.size()) ? schedule.at(j + 1) : 0.0;
    x = euler_step(x, v, tau, tau_next);
  }
  out.chunk = std::move(x);  // the final Euler step lands exactly on the last prediction
  return out;
}

RolloutRecord rollout(const Denoiser& denoiser, const WorldSpec& world,
                      const NoiseSchedule& schedule, const CorrectionConfig& correction,
                      int n_chunks, std::uint64_t seed, int window) {
  if (n_chunks <= 0) throw std::invalid_argument("rollout: n_chunks must be positive");
  world.validate();
  correction.validate(schedule);

  RolloutRecord rec;
  rec.frame_dim = world.frame_dim;
  rec.frames_per_chunk = world.frames_per_chunk;
  rec.seed = seed;

  RngStream run_stream(seed);
  ChunkContext ctx(window);
  for (int t = 0; t < n_chunks; ++t) {
    ChunkRng chunk_rng(run_stream.substream(static_cast<std::uint64_t>(t)));
    GeneratedChunk g = generate_chunk(denoiser, world, ctx, schedule, correction, chunk_rng);
    ctx.push(g.chunk);
    for (Vec& f : split_frames(g.chunk, world.frame_dim, world.frames_per_chunk)) {
      rec.frames.push_back(std::move(f));
    }
    rec.boundaries.push_back(static_cast<int>(rec.frames.size()) - 1);
    rec.chunks.push_back(std::move(g.chunk));
    rec.traces.push_back(std::move(g.traces));
  }
  return rec;
}

std::vector<Vec> split_frames(const Vec& chunk, int frame_dim, int frames_per_chunk) {
  if (chunk.size() != static_cast<Eigen::Index>(frame_dim) * frames_per_chunk) {
    throw std::invalid_argument("split_frames: chunk dimension mismatch");
  }
  std::vector<Vec> frames;
  frames.reserve(static_cast<std::size_t>(frames_per_chunk));
  for (int f = 0; f < frames_per_chunk; ++f) {
    frames.push_back(chunk.segment(static_cast<Eigen::Index>(f) * frame_dim, frame_dim));
  }
  return frames;
}

}  // namespace ttclab
