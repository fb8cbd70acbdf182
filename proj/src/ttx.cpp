#include "ttclab/ttx.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace ttclab {

namespace {
constexpr std::uint64_t kCandidateSalt = 0xCA4D1DA7E5ULL;
constexpr double kFdStep = 1e-4;
constexpr double kMaxGradNorm = 10.0;
constexpr double kMomentum = 0.9;
}  // namespace

const char* to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::Reconstruction: return "reconstruction";
    case RewardKind::Semantic: return "semantic";
    case RewardKind::DriftPenalty: return "drift-penalty";
  }
  return "?";
}

RewardKind reward_kind_from_string(const std::string& s) {
  if (s == "reconstruction") return RewardKind::Reconstruction;
  if (s == "semantic") return RewardKind::Semantic;
  if (s == "drift-penalty") return RewardKind::DriftPenalty;
  throw std::invalid_argument("ttx: unknown reward kind '" + s + "'");
}

double RewardSpec::evaluate(const Vec& chunk) const {
  if (chunk.size() != reference.size()) {
    throw std::invalid_argument("reward: chunk/reference size mismatch");
  }
  switch (kind) {
    case RewardKind::Reconstruction:
      return -(chunk - reference).squaredNorm();
    case RewardKind::DriftPenalty:
      return -(chunk - reference).norm();
    case RewardKind::Semantic: {
      if (!encoder) throw std::invalid_argument("reward: semantic reward needs an encoder");
      const Vec za = encoder->encode(chunk);
      const Vec zb = encoder->encode(reference);
      const double na = za.norm(), nb = zb.norm();
      if (na == 0.0 || nb == 0.0) {
        throw std::domain_error("reward: zero-norm embedding in semantic reward");
      }
      return za.dot(zb) / (na * nb);
    }
  }
  throw std::logic_error("reward: unreachable");
}

void AdapterSpec::validate() const {
  if (up.rows() <= 0 || up.cols() <= 0) throw std::invalid_argument("adapter: empty deltas");
  if (down.rows() != up.cols() || down.cols() != up.rows()) {
    throw std::invalid_argument("adapter: up is (dim x rank), down must be (rank x dim)");
  }
  if (steps < 0) throw std::invalid_argument("adapter: steps must be >= 0");
  if (!(step_size > 0.0)) throw std::invalid_argument("adapter: step_size must be > 0");
  if (proximal_weight < 0.0) throw std::invalid_argument("adapter: proximal_weight must be >= 0");
  if (horizon < 1) throw std::invalid_argument("adapter: horizon must be >= 1");
}

AdapterSpec AdapterSpec::zero(int dim, int rank) {
  if (dim <= 0 || rank <= 0) throw std::invalid_argument("adapter: dim and rank must be positive");
  AdapterSpec a;
  a.up = Mat::Zero(dim, rank);
  a.down = Mat::Zero(rank, dim);
  return a;
}

AdapterSpec AdapterSpec::seeded(int dim, int rank, std::uint64_t seed) {
  AdapterSpec a = zero(dim, rank);
  RngStream rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int r = 0; r < rank; ++r) {
    for (int c = 0; c < dim; ++c) a.down(r, c) = scale * rng.normal();
  }
  return a;
}

AdaptedDenoiser::AdaptedDenoiser(DenoiserPtr inner, AdapterSpec adapter)
    : inner_(std::move(inner)), adapter_(std::move(adapter)) {
  if (!inner_) throw std::invalid_argument("adapted denoiser: null inner");
  adapter_.validate();
  is_zero_ = adapter_.is_zero();
}

Vec AdaptedDenoiser::predict(const ConditionalPrior& prior, const Vec& x_tau, double tau) const {
  Vec u = inner_->predict(prior, x_tau, tau);
  if (is_zero_) return u;  // exact passthrough
  if (u.size() != adapter_.up.rows()) {
    throw std::invalid_argument("adapted denoiser: adapter dim mismatch");
  }
  return u + adapter_.up * (adapter_.down * u);
}

DenoiserPtr make_adapted_denoiser(DenoiserPtr inner, AdapterSpec adapter) {
  return std::make_shared<AdaptedDenoiser>(std::move(inner), std::move(adapter));
}

SelectionOutcome best_of_n(const ChunkGenerator& generate, const RewardFn& reward, int n,
                           ChunkRng& rng) {
  if (n <= 0) throw std::invalid_argument("best_of_n: n must be positive");
  SelectionOutcome out;
  out.rewards.reserve(static_cast<std::size_t>(n));
  Vec best_chunk;
  double best_reward = 0.0;
  for (int c = 0; c < n; ++c) {
    GeneratedChunk g;
    if (c == 0) {
      g = generate(rng);
    } else {
      ChunkRng fork(rng.stream().substream(mix_key(kCandidateSalt, static_cast<std::uint64_t>(c))));
      g = generate(fork);
    }
    const double r = reward(g.chunk);
    out.rewards.push_back(r);
    if (c == 0 || r > best_reward) {  // strict >: ties go to the lowest index
      best_reward = r;
      best_chunk = g.chunk;
      out.winner = c;
    }
    for (auto& t : g.traces) out.generated.traces.push_back(std::move(t));
  }
  out.generated.chunk = std::move(best_chunk);
  return out;
}

SelectionOutcome search_over_path(const Denoiser& denoiser, const WorldSpec& world,
                                  const ChunkContext& ctx, const NoiseSchedule& schedule,
                                  const RewardFn& reward, int n, ChunkRng& rng) {
  if (n <= 0) throw std::invalid_argument("search_over_path: n must be positive");
  if (schedule.top() != 1.0) {
    throw std::invalid_argument("search_over_path: schedule must start at tau = 1");
  }
  const ChunkPriors priors = make_chunk_priors(world, ctx);
  const Eigen::Index dim = world.chunk_dim();

  // Candidate 0 continues the caller's stream; the rest get persistent forks.
  std::vector<ChunkRng> forks;
  forks.reserve(static_cast<std::size_t>(n - 1));
  for (int c = 1; c < n; ++c) {
    forks.emplace_back(rng.stream().substream(mix_key(kCandidateSalt, static_cast<std::uint64_t>(c))));
  }
  auto rng_for = [&](int c) -> ChunkRng& {
    return c == 0 ? rng : forks[static_cast<std::size_t>(c - 1)];
  };

  SelectionOutcome out;
  Vec x0;  // running winner prediction
  for (int j = 0; j < schedule.size(); ++j) {
    const double tau = schedule.at(j);
    Vec best;
    double best_reward = 0.0;
    int winner = 0;
    for (int c = 0; c < n; ++c) {
      auto [eps, id] = rng_for(c).draw(dim);
      const Vec x_tau = (j == 0) ? eps : forward_diffuse(x0, eps, tau);
      Vec cand = denoiser.predict(priors.contextual(), x_tau, tau);
      const double r = reward(cand);
      if (c == 0 || r > best_reward) {
        best_reward = r;
        best = cand;
        winner = c;
      }
      out.generated.traces.push_back({tau, priors.contextual_tag(), std::move(cand), {id}});
    }
    x0 = std::move(best);
    out.winner = winner;  // winner of the final transition
    out.rewards.push_back(best_reward);
  }
  out.generated.chunk = std::move(x0);
  return out;
}

namespace {

// Mean reward of adapter.horizon successive adapted generations (each chunk
// conditioning the next), regenerated from a fixed substream so the map
// deltas -> reward is deterministic within an iteration.
double eval_adapted(const DenoiserPtr& inner, const AdapterSpec& adapter,
                    const RewardSpec& reward, const WorldSpec& world,
                    const ChunkContext& train_ctx, const NoiseSchedule& schedule,
                    const RngStream& iter_stream) {
  AdaptedDenoiser den(inner, adapter);
  ChunkRng rng{RngStream(iter_stream)};
  ChunkContext ctx = train_ctx;
  double total = 0.0;
  for (int h = 0; h < adapter.horizon; ++h) {
    GeneratedChunk g = generate_chunk_stochastic(den, world, ctx, schedule, rng);
    total += reward.evaluate(g.chunk);
    if (h + 1 < adapter.horizon) ctx.push(std::move(g.chunk));
  }
  return total / adapter.horizon;
}

}  // namespace

TtoGradient tto_reward_gradient(const DenoiserPtr& inner, AdapterSpec adapter,
                                const RewardSpec& reward, const WorldSpec& world,
                                const ChunkContext& train_ctx, const NoiseSchedule& schedule,
                                const RngStream& iter_stream, bool use_analytic) {
  if (!inner) throw std::invalid_argument("tto_reward_gradient: null inner denoiser");
  adapter.validate();
  TtoGradient grad{Mat(adapter.up.rows(), adapter.up.cols()),
                   Mat(adapter.down.rows(), adapter.down.cols())};
  if (use_analytic) {
    if (schedule.size() != 1 || schedule.top() != 1.0 ||
        reward.kind != RewardKind::Reconstruction || adapter.horizon != 1) {
      throw std::invalid_argument(
          "tto_reward_gradient: analytic gradient only covers the single-level "
          "single-horizon reconstruction case");
    }
    // chunk = u0 + up * (down * u0) with u0 the inner prediction at tau = 1,
    // which is constant in the latent; reward = -|chunk - ref|^2. The
    // composition is affine in each delta matrix, so the gradient is exact.
    ChunkRng probe{RngStream(iter_stream)};
    const ChunkPriors priors = make_chunk_priors(world, train_ctx);
    auto [x_init, id0] = probe.draw(world.chunk_dim());
    (void)id0;
    const Vec u0 = inner->predict(priors.contextual(), x_init, 1.0);
    const Vec chunk = u0 + adapter.up * (adapter.down * u0);
    const Vec g = -2.0 * (chunk - reward.reference);
    grad.up = g * (adapter.down * u0).transpose();
    grad.down = adapter.up.transpose() * g * u0.transpose();
    return grad;
  }
  auto fd = [&](Mat& m, Mat& out) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double saved = m(i, j);
        m(i, j) = saved + kFdStep;
        const double rp =
            eval_adapted(inner, adapter, reward, world, train_ctx, schedule, iter_stream);
        m(i, j) = saved - kFdStep;
        const double rm =
            eval_adapted(inner, adapter, reward, world, train_ctx, schedule, iter_stream);
        m(i, j) = saved;
        out(i, j) = (rp - rm) / (2.0 * kFdStep);
      }
    }
  };
  fd(adapter.up, grad.up);
  fd(adapter.down, grad.down);
  return grad;
}

TtoResult tto_finetune(const DenoiserPtr& inner, AdapterSpec adapter, const RewardSpec& reward,
                       const WorldSpec& world, const ChunkContext& train_ctx,
                       const NoiseSchedule& schedule, RngStream rng) {
  if (!inner) throw std::invalid_argument("tto_finetune: null inner denoiser");
  adapter.validate();

  // The single-level reconstruction composition is affine in each delta
  // matrix (the denoiser output at tau = 1 is constant in the latent), so
  // the exact gradient is available; everywhere else use central finite
  // differences.
  const bool affine_case = schedule.size() == 1 && schedule.top() == 1.0 &&
                           reward.kind == RewardKind::Reconstruction && adapter.horizon == 1;

  TtoResult res;
  res.reward_trace.reserve(static_cast<std::size_t>(adapter.steps));
  Mat vel_up = Mat::Zero(adapter.up.rows(), adapter.up.cols());
  Mat vel_down = Mat::Zero(adapter.down.rows(), adapter.down.cols());
  for (int it = 0; it < adapter.steps; ++it) {
    const RngStream iter_stream = rng.substream(static_cast<std::uint64_t>(it));
    const double r0 =
        eval_adapted(inner, adapter, reward, world, train_ctx, schedule, iter_stream);
    if (!std::isfinite(r0)) {
      throw std::runtime_error("tto_finetune: non-finite reward at iteration " +
                               std::to_string(it));
    }
    res.reward_trace.push_back(r0);

    TtoGradient grad = tto_reward_gradient(inner, adapter, reward, world, train_ctx, schedule,
                                           iter_stream, affine_case);
    if (adapter.proximal_weight > 0.0) {
      grad.up -= 2.0 * adapter.proximal_weight * adapter.up;
      grad.down -= 2.0 * adapter.proximal_weight * adapter.down;
    }
    // Cap the global gradient norm: squared-error rewards grow without bound
    // on a bad adapter (especially over self-conditioned horizons), and one
    // oversized step can send the ascent to non-finite territory.
    const double gnorm = std::sqrt(grad.up.squaredNorm() + grad.down.squaredNorm());
    if (gnorm > kMaxGradNorm) {
      grad.up *= kMaxGradNorm / gnorm;
      grad.down *= kMaxGradNorm / gnorm;
    }
    // Heavy-ball ascent: the clipped gradient feeds a momentum buffer, which
    // both smooths the stochastic-evaluation noise across iterations and
    // accelerates progress along the narrow valley a rotation-type
    // correction has to travel.
    vel_up = kMomentum * vel_up + grad.up;
    vel_down = kMomentum * vel_down + grad.down;
    adapter.up += adapter.step_size * vel_up;
    adapter.down += adapter.step_size * vel_down;
  }
  res.adapter = std::move(adapter);
  return res;
}

const char* to_string(TtsMode mode) {
  switch (mode) {
    case TtsMode::None: return "none";
    case TtsMode::BestOfN: return "best-of-n";
    case TtsMode::SearchOverPath: return "search-over-path";
  }
  return "?";
}

TtsMode tts_mode_from_string(const std::string& s) {
  if (s == "none") return TtsMode::None;
  if (s == "best-of-n") return TtsMode::BestOfN;
  if (s == "search-over-path") return TtsMode::SearchOverPath;
  throw std::invalid_argument("ttx: unknown test-time-scaling mode '" + s + "'");
}

RolloutRecord rollout_with_selection(const Denoiser& denoiser, const WorldSpec& world,
                                     const NoiseSchedule& schedule, TtsMode mode, int n,
                                     RewardKind reward_kind,
                                     const std::optional<FrameEncoder>& reward_encoder,
                                     int n_chunks, std::uint64_t seed, int window) {
  if (mode == TtsMode::None) {
    return rollout(denoiser, world, schedule, CorrectionConfig::baseline(), n_chunks, seed,
                   window);
  }
  if (n_chunks <= 0) throw std::invalid_argument("rollout: n_chunks must be positive");
  if (n <= 0) throw std::invalid_argument("rollout: candidate count must be positive");
  world.validate();
  if (reward_kind == RewardKind::Semantic && !reward_encoder) {
    throw std::invalid_argument("rollout: semantic reward needs an encoder");
  }

  RolloutRecord rec;
  rec.frame_dim = world.frame_dim;
  rec.frames_per_chunk = world.frames_per_chunk;
  rec.seed = seed;

  RngStream run_stream(seed);
  ChunkContext ctx(window);
  RewardSpec reward;
  reward.kind = reward_kind;
  reward.encoder = reward_encoder;

  for (int t = 0; t < n_chunks; ++t) {
    ChunkRng chunk_rng(run_stream.substream(static_cast<std::uint64_t>(t)));
    // Chunk 0 defines the reference, so there is nothing to score it
    // against yet; a constant reward keeps the candidate count (and cost)
    // uniform while ties send the win to candidate 0.
    RewardFn fn;
    if (t == 0) {
      fn = [](const Vec&) { return 0.0; };
    } else {
      fn = [&reward](const Vec& chunk) { return reward.evaluate(chunk); };
    }
    SelectionOutcome sel;
    if (mode == TtsMode::BestOfN) {
      const ChunkGenerator gen = [&](ChunkRng& r) {
        return generate_chunk_stochastic(denoiser, world, ctx, schedule, r);
      };
      sel = best_of_n(gen, fn, n, chunk_rng);
    } else {
      sel = search_over_path(denoiser, world, ctx, schedule, fn, n, chunk_rng);
    }
    if (t == 0) reward.reference = sel.generated.chunk;
    ctx.push(sel.generated.chunk);
    for (Vec& f : split_frames(sel.generated.chunk, world.frame_dim, world.frames_per_chunk)) {
      rec.frames.push_back(std::move(f));
    }
    rec.boundaries.push_back(static_cast<int>(rec.frames.size()) - 1);
    rec.chunks.push_back(std::move(sel.generated.chunk));
    rec.traces.push_back(std::move(sel.generated.traces));
  }
  return rec;
}

}  // namespace ttclab
