#pragma once

#include <memory>
#include <vector>

#include "ttclab/rng.hpp"
#include "ttclab/types.hpp"

namespace ttclab {

/// One Gaussian with diagonal covariance.
struct GaussianPrior {
  Vec mean;
  Vec var;  // diagonal of the covariance, entries >= 0
};

/// Conditional distribution of the next chunk given its predecessor:
/// a K-component diagonal-Gaussian mixture (K = 1 is the plain Gaussian
/// world). Weights are positive and sum to one.
struct ConditionalPrior {
  std::vector<GaussianPrior> components;
  std::vector<double> weights;

  int k() const { return static_cast<int>(components.size()); }
  bool is_single() const { return components.size() == 1; }
  const GaussianPrior& single() const;
  Eigen::Index dim() const { return components.front().mean.size(); }
};

/// Linear-Gaussian (optionally mixture) "latent video" world. A chunk is a
/// flattened stack of frames_per_chunk frames of frame_dim coordinates; the
/// chunk process is first-order: chunk_{t+1} ~ mixture_k N(transition *
/// chunk_t + offset + mixture_offset_k, diag(process_var)).
struct WorldSpec {
  int frame_dim = 8;
  int frames_per_chunk = 4;
  Mat transition;    // (F*D x F*D)
  Vec offset;        // (F*D)
  Vec process_var;   // diagonal of the process covariance
  Vec init_mean;     // distribution of chunk 0
  Vec init_var;
  bool stationary = true;  // when set, spectral radius of transition must be < 1

  // Optional mixture structure on the conditional (empty => K = 1).
  std::vector<Vec> mixture_offsets;
  std::vector<double> mixture_weights;

  int chunk_dim() const { return frame_dim * frames_per_chunk; }
  int mixture_k() const { return mixture_offsets.empty() ? 1 : static_cast<int>(mixture_offsets.size()); }
  ConditionalPrior init_prior() const;

  /// Throws std::invalid_argument on any broken invariant (dimension
  /// mismatches, negative variances, bad weights, non-contractive
  /// transition when stationary is set).
  void validate() const;
};

/// Default desk-scale world: scalar transition 0.9 * I, offset 0.1, unit
/// process variance, chunk 0 at the stationary distribution.
WorldSpec make_default_world(int frame_dim = 8, int frames_per_chunk = 4);

/// Motion-chain world: frames evolve under a per-frame map that rotates the
/// first two coordinates by angle_deg degrees and contracts the remaining
/// coordinates toward `level` with factor `decay`. Each frame of the next
/// chunk continues the *last* frame of the previous chunk, so chunk
/// boundaries are genuine temporal junctions and the rotating pair traces a
/// circular orbit of radius `amplitude` through the whole clip. Per-frame
/// innovation variance is process_var_step, accumulated honestly along the
/// chain. The rotation is measure-preserving (unit spectral radius), so the
/// spec is marked non-stationary.
WorldSpec make_motion_world(int frame_dim = 8, int frames_per_chunk = 4,
                            double angle_deg = 45.0, double decay = 0.9,
                            double level = 1.0, double amplitude = 3.0,
                            double process_var_step = 0.02);

/// Conditional prior of the next chunk given a predecessor chunk.
ConditionalPrior conditional_prior(const WorldSpec& world, const Vec& chunk);

/// Blends two conditional priors on their means: lambda * reference +
/// (1 - lambda) * evolving, componentwise. Weights/variances must agree.
ConditionalPrior blend_priors(const ConditionalPrior& reference,
                              const ConditionalPrior& evolving, double lambda);

/// Samples a ground-truth trajectory of n_chunks chunks (chunk 0 from the
/// init distribution, then the conditional chain).
std::vector<Vec> sample_ground_truth(const WorldSpec& world, int n_chunks, RngStream& rng);

/// Exact posterior mean E[x0 | x_tau] for a single diagonal Gaussian prior
/// under the forward corruption x_tau = (1-tau) x0 + tau eps:
/// mu + (1-tau) var / ((1-tau)^2 var + tau^2) * (x_tau - (1-tau) mu),
/// coordinatewise. tau = 0 returns x_tau; tau = 1 returns mu.
Vec exact_posterior_mean(const GaussianPrior& prior, const Vec& x_tau, double tau);

/// Posterior component responsibilities for a mixture prior at level tau,
/// computed in log space. Sums to one.
Vec mixture_responsibilities(const ConditionalPrior& prior, const Vec& x_tau, double tau);

/// Responsibility-weighted posterior mean for a mixture prior. K = 1
/// coincides with exact_posterior_mean.
Vec mixture_posterior_mean(const ConditionalPrior& prior, const Vec& x_tau, double tau);

/// Clean-prediction interface: given the conditional prior supplied by the
/// sampler (which owns context resolution) and a noisy latent at level tau,
/// return a clean-chunk prediction.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Vec predict(const ConditionalPrior& prior, const Vec& x_tau, double tau) const = 0;
};

using DenoiserPtr = std::shared_ptr<const Denoiser>;

/// Exact Gaussian posterior mean; requires a single-component prior.
class ExactDenoiser final : public Denoiser {
 public:
  Vec predict(const ConditionalPrior& prior, const Vec& x_tau, double tau) const override;
};

/// Responsibility-weighted mixture posterior mean (any K >= 1).
class MixtureDenoiser final : public Denoiser {
 public:
  Vec predict(const ConditionalPrior& prior, const Vec& x_tau, double tau) const override;
};

/// Miscalibrated model emulation: gain * inner(x) + bias. gain = 1 and
/// bias = 0 reproduce the inner denoiser bit for bit.
class BiasedDenoiser final : public Denoiser {
 public:
  BiasedDenoiser(DenoiserPtr inner, double gain, Vec bias);
  Vec predict(const ConditionalPrior& prior, const Vec& x_tau, double tau) const override;
  double gain() const { return gain_; }
  const Vec& bias() const { return bias_; }

 private:
  DenoiserPtr inner_;
  double gain_;
  Vec bias_;
  bool is_identity_;
};

DenoiserPtr make_exact_denoiser();
DenoiserPtr make_mixture_denoiser();
DenoiserPtr make_biased_denoiser(DenoiserPtr inner, double gain, const Vec& bias);

}  // namespace ttclab
