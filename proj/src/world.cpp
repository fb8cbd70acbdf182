#include "ttclab/world.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace ttclab {

namespace {

void check_dim(const Vec& v, Eigen::Index n, const char* name) {
  if (v.size() != n) {
    throw std::invalid_argument(std::string("world: ") + name + " has size " +
                                std::to_string(v.size()) + ", expected " + std::to_string(n));
  }
}

// log N(x; mu, diag(var)) for one coordinate pair, var > 0.
inline double log_normal_1d(double x, double mu, double var) {
  const double d = x - mu;
  return -0.5 * (std::log(2.0 * M_PI * var) + d * d / var);
}

}  // namespace

const GaussianPrior& ConditionalPrior::single() const {
  if (!is_single()) throw std::invalid_argument("prior: expected a single component");
  return components.front();
}

ConditionalPrior WorldSpec::init_prior() const {
  ConditionalPrior p;
  p.components.push_back({init_mean, init_var});
  p.weights.push_back(1.0);
  return p;
}

void WorldSpec::validate() const {
  if (frame_dim <= 0 || frames_per_chunk <= 0) {
    throw std::invalid_argument("world: frame_dim and frames_per_chunk must be positive");
  }
  const Eigen::Index n = chunk_dim();
  if (transition.rows() != n || transition.cols() != n) {
    throw std::invalid_argument("world: transition must be " + std::to_string(n) + "x" +
                                std::to_string(n));
  }
  check_dim(offset, n, "offset");
  check_dim(process_var, n, "process_var");
  check_dim(init_mean, n, "init_mean");
  check_dim(init_var, n, "init_var");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (process_var[i] < 0.0 || init_var[i] < 0.0) {
      throw std::invalid_argument("world: variances must be nonnegative");
    }
  }
  if (mixture_offsets.size() != mixture_weights.size()) {
    throw std::invalid_argument("world: mixture offsets and weights must pair up");
  }
  if (!mixture_weights.empty()) {
    double sum = 0.0;
    for (double w : mixture_weights) {
      if (!(w > 0.0)) throw std::invalid_argument("world: mixture weights must be positive");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("world: mixture weights must sum to 1");
    }
    for (const Vec& off : mixture_offsets) check_dim(off, n, "mixture offset");
  }
  if (stationary) {
    const auto eigs = Eigen::EigenSolver<Mat>(transition, false).eigenvalues();
    double rho = 0.0;
    for (Eigen::Index i = 0; i < eigs.size(); ++i) rho = std::max(rho, std::abs(eigs[i]));
    if (!(rho < 1.0)) {
      throw std::invalid_argument("world: stationary flag set but spectral radius is " +
                                  std::to_string(rho));
    }
  }
}

WorldSpec make_default_world(int frame_dim, int frames_per_chunk) {
  WorldSpec w;
  w.frame_dim = frame_dim;
  w.frames_per_chunk = frames_per_chunk;
  const Eigen::Index n = w.chunk_dim();
  const double m = 0.9;
  w.transition = m * Mat::Identity(n, n);
  w.offset = Vec::Constant(n, 0.1);
  w.process_var = Vec::Ones(n);
  // Chunk 0 sits at the stationary law of the scalar AR(1) chain.
  w.init_mean = Vec::Constant(n, 0.1 / (1.0 - m));
  w.init_var = Vec::Constant(n, 1.0 / (1.0 - m * m));
  w.stationary = true;
  return w;
}

WorldSpec make_motion_world(int frame_dim, int frames_per_chunk, double angle_deg,
                            double decay, double level, double amplitude,
                            double process_var_step) {
  if (frame_dim < 2) throw std::invalid_argument("motion world: frame_dim must be >= 2");
  WorldSpec w;
  w.frame_dim = frame_dim;
  w.frames_per_chunk = frames_per_chunk;
  const int d = frame_dim;
  const int f = frames_per_chunk;
  const Eigen::Index n = w.chunk_dim();
  const double th = angle_deg * std::numbers::pi / 180.0;

  // Per-frame map: rotate the leading coordinate pair, contract the rest.
  Mat frame_map = Mat::Zero(d, d);
  frame_map(0, 0) = std::cos(th);
  frame_map(0, 1) = -std::sin(th);
  frame_map(1, 0) = std::sin(th);
  frame_map(1, 1) = std::cos(th);
  for (int i = 2; i < d; ++i) frame_map(i, i) = decay;

  // Frame j of the next chunk continues the last frame of the previous
  // chunk by j+1 applications of the per-frame map.
  w.transition = Mat::Zero(n, n);
  w.offset = Vec::Zero(n);
  w.process_var = Vec::Zero(n);
  Mat power = Mat::Identity(d, d);
  for (int j = 0; j < f; ++j) {
    power = power * frame_map;
    w.transition.block(j * d, (f - 1) * d, d, d) = power;
    double var_acc = 0.0;
    for (int k = 0; k <= j; ++k) var_acc += std::pow(decay, 2 * k);
    for (int i = 2; i < d; ++i) {
      w.offset[j * d + i] = level * (1.0 - std::pow(decay, j + 1));
      w.process_var[j * d + i] = process_var_step * var_acc;
    }
    w.process_var[j * d + 0] = process_var_step * (j + 1);
    w.process_var[j * d + 1] = process_var_step * (j + 1);
  }

  // Chunk 0 starts on the orbit with the static coordinates already settled.
  w.init_mean = Vec::Zero(n);
  for (int j = 0; j < f; ++j) {
    const double phase = j * th;
    w.init_mean[j * d + 0] = amplitude * std::cos(phase);
    w.init_mean[j * d + 1] = amplitude * std::sin(phase);
    for (int i = 2; i < d; ++i) w.init_mean[j * d + i] = level;
  }
  w.init_var = w.process_var;
  w.stationary = false;  // the rotation block has unit spectral radius
  return w;
}

ConditionalPrior conditional_prior(const WorldSpec& world, const Vec& chunk) {
  if (chunk.size() != world.chunk_dim()) {
    throw std::invalid_argument("conditional_prior: chunk has wrong dimension");
  }
  ConditionalPrior p;
  const Vec base = world.transition * chunk + world.offset;
  if (world.mixture_offsets.empty()) {
    p.components.push_back({base, world.process_var});
    p.weights.push_back(1.0);
  } else {
    for (std::size_t k = 0; k < world.mixture_offsets.size(); ++k) {
      p.components.push_back({base + world.mixture_offsets[k], world.process_var});
      p.weights.push_back(world.mixture_weights[k]);
    }
  }
  return p;
}

ConditionalPrior blend_priors(const ConditionalPrior& reference,
                              const ConditionalPrior& evolving, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw std::invalid_argument("blend_priors: lambda outside [0, 1]");
  }
  if (lambda == 0.0) return evolving;
  if (lambda == 1.0) return reference;
  if (reference.k() != evolving.k()) {
    throw std::invalid_argument("blend_priors: component count mismatch");
  }
  ConditionalPrior out = evolving;
  for (int k = 0; k < out.k(); ++k) {
    out.components[static_cast<std::size_t>(k)].mean =
        lambda * reference.components[static_cast<std::size_t>(k)].mean +
        (1.0 - lambda) * evolving.components[static_cast<std::size_t>(k)].mean;
  }
  return out;
}

std::vector<Vec> sample_ground_truth(const WorldSpec& world, int n_chunks, RngStream& rng) {
  if (n_chunks <= 0) throw std::invalid_argument("sample_ground_truth: n_chunks must be > 0");
  world.validate();
  const Eigen::Index n = world.chunk_dim();
  std::vector<Vec> chunks;
  chunks.reserve(static_cast<std::size_t>(n_chunks));
  for (int t = 0; t < n_chunks; ++t) {
    const ConditionalPrior prior =
        (t == 0) ? world.init_prior() : conditional_prior(world, chunks.back());
    // Pick the mixture component, then draw the diagonal Gaussian.
    std::size_t k = 0;
    if (prior.k() > 1) {
      double u = rng.uniform01();
      double acc = 0.0;
      for (; k + 1 < prior.components.size(); ++k) {
        acc += prior.weights[k];
        if (u < acc) break;
      }
    }
    const GaussianPrior& g = prior.components[k];
    Vec x(n);
    const Vec eps = rng.normal_vec(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = g.mean[i] + std::sqrt(g.var[i]) * eps[i];
    chunks.push_back(std::move(x));
  }
  return chunks;
}

Vec exact_posterior_mean(const GaussianPrior& prior, const Vec& x_tau, double tau) {
  if (prior.mean.size() != x_tau.size()) {
    throw std::invalid_argument("exact_posterior_mean: size mismatch");
  }
  if (tau < 0.0 || tau > 1.0) {
    throw std::invalid_argument("exact_posterior_mean: tau outside [0, 1]");
  }
  if (tau == 0.0) return x_tau;  // noiseless observation
  const double a = 1.0 - tau;
  const Eigen::Index n = x_tau.size();
  Vec out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double gain = a * prior.var[i] / (a * a * prior.var[i] + tau * tau);
    out[i] = prior.mean[i] + gain * (x_tau[i] - a * prior.mean[i]);
  }
  return out;
}

Vec mixture_responsibilities(const ConditionalPrior& prior, const Vec& x_tau, double tau) {
  if (prior.components.empty()) {
    throw std::invalid_argument("mixture_responsibilities: empty prior");
  }
  if (!(tau > 0.0) || tau > 1.0) {
    throw std::invalid_argument("mixture_responsibilities: tau outside (0, 1]");
  }
  const double a = 1.0 - tau;
  const int K = prior.k();
  Vec logp(K);
  for (int k = 0; k < K; ++k) {
    const GaussianPrior& g = prior.components[static_cast<std::size_t>(k)];
    if (g.mean.size() != x_tau.size()) {
      throw std::invalid_argument("mixture_responsibilities: size mismatch");
    }
    // Marginal of x_tau under component k: N(a*mu, a^2*var + tau^2).
    double lp = std::log(prior.weights[static_cast<std::size_t>(k)]);
    for (Eigen::Index i = 0; i < x_tau.size(); ++i) {
      lp += log_normal_1d(x_tau[i], a * g.mean[i], a * a * g.var[i] + tau * tau);
    }
    logp[k] = lp;
  }
  const double m = logp.maxCoeff();
  Vec r = (logp.array() - m).exp();
  r /= r.sum();
  return r;
}

Vec mixture_posterior_mean(const ConditionalPrior& prior, const Vec& x_tau, double tau) {
  if (prior.is_single()) return exact_posterior_mean(prior.single(), x_tau, tau);
  if (tau == 0.0) return x_tau;
  const Vec r = mixture_responsibilities(prior, x_tau, tau);
  Vec out = Vec::Zero(x_tau.size());
  for (int k = 0; k < prior.k(); ++k) {
    out += r[k] * exact_posterior_mean(prior.components[static_cast<std::size_t>(k)], x_tau, tau);
  }
  return out;
}

Vec ExactDenoiser::predict(const ConditionalPrior& prior, const Vec& x_tau, double tau) const {
  return exact_posterior_mean(prior.single(), x_tau, tau);
}

Vec MixtureDenoiser::predict(const ConditionalPrior& prior, const Vec& x_tau, double tau) const {
  return mixture_posterior_mean(prior, x_tau, tau);
}

BiasedDenoiser::BiasedDenoiser(DenoiserPtr inner, double gain, Vec bias)
    : inner_(std::move(inner)), gain_(gain), bias_(std::move(bias)) {
  if (!inner_) throw std::invalid_argument("biased denoiser: null inner");
  is_identity_ = (gain_ == 1.0) && (bias_.size() == 0 || bias_.isZero(0.0));
}

Vec BiasedDenoiser::predict(const ConditionalPrior& prior, const Vec& x_tau, double tau) const {
  Vec u = inner_->predict(prior, x_tau, tau);
  if (is_identity_) return u;  // exact passthrough, bit for bit
  if (bias_.size() != 0 && bias_.size() != u.size()) {
    throw std::invalid_argument("biased denoiser: bias dimension mismatch");
  }
  if (bias_.size() == 0) return gain_ * u;
  return gain_ * u + bias_;
}

DenoiserPtr make_exact_denoiser() { return std::make_shared<ExactDenoiser>(); }
DenoiserPtr make_mixture_denoiser() { return std::make_shared<MixtureDenoiser>(); }
DenoiserPtr make_biased_denoiser(DenoiserPtr inner, double gain, const Vec& bias) {
  return std::make_shared<BiasedDenoiser>(std::move(inner), gain, bias);
}

}  // namespace ttclab
