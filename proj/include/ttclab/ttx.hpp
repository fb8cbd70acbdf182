#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ttclab/metrics.hpp"
#include "ttclab/sampler.hpp"
#include "ttclab/world.hpp"

namespace ttclab {

enum class RewardKind { Reconstruction, Semantic, DriftPenalty };

const char* to_string(RewardKind kind);
RewardKind reward_kind_from_string(const std::string& s);

/// Chunk-level reward. Reconstruction: negative squared distance to the
/// reference chunk. Semantic: cosine similarity of fixed-encoder embeddings
/// of chunk and reference. DriftPenalty: negative distance to the reference.
struct RewardSpec {
  RewardKind kind = RewardKind::DriftPenalty;
  Vec reference;
  std::optional<FrameEncoder> encoder;  // required for Semantic, on chunk vectors

  double evaluate(const Vec& chunk) const;
};

/// Low-rank test-time adapter: the product up * down (dim x rank times
/// rank x dim) perturbs the clean-prediction map on the output side.
struct AdapterSpec {
  Mat up;    // (dim x rank)
  Mat down;  // (rank x dim)
  double step_size = 1e-4;
  int steps = 200;
  double proximal_weight = 0.0;
  // Each training evaluation generates this many successive chunks (each
  // conditioning the next) and averages their rewards. A horizon of 1 scores
  // a single transition; longer horizons expose errors that only compound
  // when the model runs on its own outputs.
  int horizon = 1;

  int dim() const { return static_cast<int>(up.rows()); }
  int rank() const { return static_cast<int>(up.cols()); }
  bool is_zero() const { return up.isZero(0.0) && down.isZero(0.0); }
  double delta_sq_norm() const { return up.squaredNorm() + down.squaredNorm(); }
  void validate() const;

  static AdapterSpec zero(int dim, int rank);
  /// Standard warm start for gradient ascent: `down` Gaussian (scale
  /// 1/sqrt(dim)), `up` zero — the all-zero pair is a stationary point of
  /// the bilinear composition and gradient ascent could never leave it.
  static AdapterSpec seeded(int dim, int rank, std::uint64_t seed);
};

/// adapted(x) = inner(x) + up * (down * inner(x)). A zero adapter
/// reproduces the inner denoiser bit for bit.
class AdaptedDenoiser final : public Denoiser {
 public:
  AdaptedDenoiser(DenoiserPtr inner, AdapterSpec adapter);
  Vec predict(const ConditionalPrior& prior, const Vec& x_tau, double tau) const override;
  const AdapterSpec& adapter() const { return adapter_; }

 private:
  DenoiserPtr inner_;
  AdapterSpec adapter_;
  bool is_zero_;
};

DenoiserPtr make_adapted_denoiser(DenoiserPtr inner, AdapterSpec adapter);

using ChunkGenerator = std::function<GeneratedChunk(ChunkRng&)>;
using RewardFn = std::function<double(const Vec&)>;

/// Outcome of a candidate-selection step. `generated.traces` holds the
/// calls of every candidate (candidate-major), so nfe() counts the full
/// search cost; `generated.chunk` is the winner's.
struct SelectionOutcome {
  GeneratedChunk generated;
  int winner = 0;
  std::vector<double> rewards;
};

/// Best-of-n: n full chunk generations, argmax reward, ties to the lowest
/// index. Candidate 0 continues the caller's stream (so n = 1 is
/// bit-identical to a plain generation); candidates 1.. use substreams
/// forked from it. Cost: n * (per-chunk NFE of `generate`).
SelectionOutcome best_of_n(const ChunkGenerator& generate, const RewardFn& reward, int n,
                           ChunkRng& rng);

/// Greedy per-transition search: at the initial level and at every
/// transition, n candidate noise draws are denoised and the
/// argmax-reward prediction is kept. Candidate 0 continues the caller's
/// stream; candidates 1.. use persistent forked substreams. Cost: n * J.
SelectionOutcome search_over_path(const Denoiser& denoiser, const WorldSpec& world,
                                  const ChunkContext& ctx, const NoiseSchedule& schedule,
                                  const RewardFn& reward, int n, ChunkRng& rng);

enum class TtsMode { None, BestOfN, SearchOverPath };

const char* to_string(TtsMode mode);
TtsMode tts_mode_from_string(const std::string& s);

/// Autoregressive rollout where every chunk is produced by best-of-n or
/// search-over-path against `reward_kind` measured toward the frozen
/// reference chunk. Chunk 0 (which defines the reference) is scored by a
/// constant reward, so ties send the win to candidate 0 and the reference
/// matches a plain rollout's chunk 0 under the same seed.
RolloutRecord rollout_with_selection(const Denoiser& denoiser, const WorldSpec& world,
                                     const NoiseSchedule& schedule, TtsMode mode, int n,
                                     RewardKind reward_kind,
                                     const std::optional<FrameEncoder>& reward_encoder,
                                     int n_chunks, std::uint64_t seed, int window = 3);

struct TtoResult {
  AdapterSpec adapter;
  std::vector<double> reward_trace;  // reward at the start of each iteration
};

struct TtoGradient {
  Mat up;
  Mat down;
};

/// Gradient of reward(generated chunk) with respect to the adapter deltas,
/// with the generation regenerated from `iter_stream` for every evaluation.
/// use_analytic selects the exact affine-case gradient (single-level
/// schedule, reconstruction reward); otherwise central finite differences
/// with h = 1e-4.
TtoGradient tto_reward_gradient(const DenoiserPtr& inner, AdapterSpec adapter,
                                const RewardSpec& reward, const WorldSpec& world,
                                const ChunkContext& train_ctx, const NoiseSchedule& schedule,
                                const RngStream& iter_stream, bool use_analytic);

/// Test-time optimization of the adapter deltas by plain gradient ascent on
/// reward(generated chunk) - proximal_weight * |deltas|^2. Each iteration
/// generates one chunk with the adapted denoiser under a fixed training
/// context (fresh substream per iteration, shared across the finite
/// difference evaluations within it). Gradients: central finite differences
/// (h = 1e-4 per coordinate), or the exact analytic gradient in the affine
/// single-level reconstruction case. Throws on non-finite rewards.
TtoResult tto_finetune(const DenoiserPtr& inner, AdapterSpec adapter, const RewardSpec& reward,
                       const WorldSpec& world, const ChunkContext& train_ctx,
                       const NoiseSchedule& schedule, RngStream rng);

}  // namespace ttclab
