#pragma once

#include <vector>

#include "ttclab/types.hpp"

namespace ttclab {

// Noise-level convention used throughout the lab: tau in [0, 1], tau = 1 is
// pure noise, tau = 0 is clean. Rectified-flow corruption coefficients are
// alpha(tau) = 1 - tau on the signal and sigma(tau) = tau on the noise, so
// the forward map interpolates linearly between data and noise.

inline double rf_alpha(double tau) { return 1.0 - tau; }
inline double rf_sigma(double tau) { return tau; }

/// Descending list of noise levels tau_J > ... > tau_1 > 0. The clean
/// endpoint tau = 0 is implicit and never handed to a denoiser. One
/// denoiser call per level is the per-chunk cost of the plain sampler.
class NoiseSchedule {
 public:
  const std::vector<double>& levels() const { return levels_; }
  double top() const { return levels_.front(); }
  double lowest() const { return levels_.back(); }
  int size() const { return static_cast<int>(levels_.size()); }
  double at(int i) const { return levels_[static_cast<std::size_t>(i)]; }

  bool contains(double tau) const { return index_of(tau) >= 0; }
  int index_of(double tau) const;  // -1 when absent (1e-12 tolerance)

  friend NoiseSchedule make_rf_schedule(std::vector<double> levels);

 private:
  NoiseSchedule() = default;
  std::vector<double> levels_;
};

/// Validates and wraps a level list. Throws std::invalid_argument unless the
/// levels are strictly decreasing and every level lies in (0, 1].
NoiseSchedule make_rf_schedule(std::vector<double> levels);

/// Convenience: converts integer timesteps on the usual 0..1000 grid
/// (1000 = pure noise) to tau levels, e.g. {1000, 750, 500, 250} ->
/// {1.0, 0.75, 0.5, 0.25}.
NoiseSchedule make_rf_schedule_from_timesteps(const std::vector<int>& timesteps,
                                              int t_max = 1000);

/// Forward corruption: (1 - tau) * x + tau * eps.
Vec forward_diffuse(const Vec& x, const Vec& eps, double tau);

/// Velocity consistent with a clean prediction at level tau:
/// v = (x0_hat - x_tau) / tau. Requires tau > 0.
Vec velocity_from_prediction(const Vec& x_tau, const Vec& x0_hat, double tau);

/// One deterministic integration step from tau_from down to tau_to:
/// x + (tau_from - tau_to) * v. Requires tau_from > tau_to >= 0.
Vec euler_step(const Vec& x, const Vec& v, double tau_from, double tau_to);

}  // namespace ttclab
