#include "ttclab/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ttclab {

namespace {
constexpr double kLevelTol = 1e-12;
}

int NoiseSchedule::index_of(double tau) const {
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (std::abs(levels_[i] - tau) <= kLevelTol) return static_cast<int>(i);
  }
  return -1;
}

NoiseSchedule make_rf_schedule(std::vector<double> levels) {
  if (levels.empty()) throw std::invalid_argument("schedule: needs at least one level");
  double prev = 2.0;
  for (double tau : levels) {
    if (!(tau > 0.0) || tau > 1.0) {
      throw std::invalid_argument("schedule: level " + std::to_string(tau) +
                                  " outside (0, 1]");
    }
    if (tau >= prev) throw std::invalid_argument("schedule: levels must strictly decrease");
    prev = tau;
  }
  NoiseSchedule s;
  s.levels_ = std::move(levels);
  return s;
}

NoiseSchedule make_rf_schedule_from_timesteps(const std::vector<int>& timesteps, int t_max) {
  if (t_max <= 0) throw std::invalid_argument("schedule: t_max must be positive");
  std::vector<double> levels;
  levels.reserve(timesteps.size());
  for (int t : timesteps) levels.push_back(static_cast<double>(t) / t_max);
  return make_rf_schedule(std::move(levels));
}

Vec forward_diffuse(const Vec& x, const Vec& eps, double tau) {
  if (x.size() != eps.size()) throw std::invalid_argument("forward_diffuse: size mismatch");
  if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("forward_diffuse: tau outside [0, 1]");
  return rf_alpha(tau) * x + rf_sigma(tau) * eps;
}

Vec velocity_from_prediction(const Vec& x_tau, const Vec& x0_hat, double tau) {
  if (x_tau.size() != x0_hat.size()) {
    throw std::invalid_argument("velocity_from_prediction: size mismatch");
  }
  if (!(tau > 0.0)) throw std::invalid_argument("velocity_from_prediction: tau must be > 0");
  return (x0_hat - x_tau) / tau;
}

Vec euler_step(const Vec& x, const Vec& v, double tau_from, double tau_to) {
  if (x.size() != v.size()) throw std::invalid_argument("euler_step: size mismatch");
  if (!(tau_from > tau_to) || tau_to < 0.0) {
    throw std::invalid_argument("euler_step: requires tau_from > tau_to >= 0");
  }
  return x + (tau_from - tau_to) * v;
}

}  // namespace ttclab
