#include "ttclab/oracles.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ttclab/metrics.hpp"
#include "ttclab/rng.hpp"
#include "ttclab/schedule.hpp"
#include "ttclab/ttx.hpp"
#include "ttclab/world.hpp"

namespace ttclab {

namespace {

std::string fmt3(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

/// Simpson integration of the (numerator, denominator) pair of the Bayes
/// posterior-mean integral for a scalar Gaussian prior.
double quadrature_posterior_mean(double mu, double var, double x_tau, double tau, double lo,
                                 double hi, int intervals) {
  const double h = (hi - lo) / intervals;
  const double a = 1.0 - tau;
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double x0 = lo + h * i;
    const double lw = -(x0 - mu) * (x0 - mu) / (2.0 * var) -
                      (x_tau - a * x0) * (x_tau - a * x0) / (2.0 * tau * tau);
    const double w = std::exp(lw);  // shared constants cancel in the ratio
    const double coeff = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    num += coeff * w * x0;
    den += coeff * w;
  }
  if (den == 0.0) throw std::runtime_error("oracle: quadrature mass underflowed to zero");
  return num / den;
}

}  // namespace

OracleResult oracle_posterior_quadrature() {
  OracleResult res;
  res.name = "posterior-mean-vs-quadrature";
  res.bound = 1e-6;

  const double mu = 0.7, var = 2.3;
  const double sigma = std::sqrt(var);
  double max_diff = 0.0;
  for (double tau : {0.9, 0.5, 0.2}) {
    for (double x_tau : {-1.5, 0.4, 2.0}) {
      GaussianPrior prior{Vec::Constant(1, mu), Vec::Constant(1, var)};
      const double exact = exact_posterior_mean(prior, Vec::Constant(1, x_tau), tau)(0);
      // Range bracketing both precision anchors (prior mean and the
      // rescaled observation), padded far past any posterior mass.
      const double anchor = x_tau / (1.0 - tau);
      const double spread = 12.0 * std::max(sigma, tau / (1.0 - tau));
      const double lo = std::min(mu, anchor) - spread;
      const double hi = std::max(mu, anchor) + spread;
      const double quad = quadrature_posterior_mean(mu, var, x_tau, tau, lo, hi, 200000);
      max_diff = std::max(max_diff, std::abs(exact - quad));
    }
  }

  // Frozen hand case: standard normal prior, tau = 1/2, x_tau = 1. The
  // posterior gain is (1/2) / ((1/4) + (1/4)) = 1, so the mean is exactly 1.
  GaussianPrior std_prior{Vec::Zero(1), Vec::Ones(1)};
  const double frozen = exact_posterior_mean(std_prior, Vec::Ones(1), 0.5)(0);
  const double frozen_diff = std::abs(frozen - 1.0);

  res.value = max_diff;
  res.pass = max_diff <= res.bound && frozen_diff <= 1e-12;
  res.detail = "9 (tau, x) cases on N(0.7, 2.3); frozen case |mean - 1| = " + fmt3(frozen_diff);
  return res;
}

OracleResult oracle_mixture_mc(std::uint64_t seed, int batches, int batch_size) {
  OracleResult res;
  res.name = "mixture-posterior-vs-monte-carlo";
  res.bound = 3.0;  // units: batch standard errors

  const Eigen::Index dim = 2;
  ConditionalPrior prior;
  prior.components.push_back({(Vec(2) << -1.0, 0.5).finished(), (Vec(2) << 0.8, 1.2).finished()});
  prior.components.push_back({(Vec(2) << 1.5, -0.3).finished(), (Vec(2) << 0.5, 0.9).finished()});
  prior.weights = {0.3, 0.7};
  const double tau = 0.5;
  const Vec x_tau = (Vec(2) << 0.4, -0.2).finished();

  const Vec exact = mixture_posterior_mean(prior, x_tau, tau);

  // Self-normalized Monte Carlo with the prior as proposal: weight each
  // prior draw by the corruption likelihood N(x_tau; (1-tau) x0, tau^2 I).
  RngStream rng(seed);
  Mat batch_means(batches, dim);
  const double a = 1.0 - tau;
  for (int b = 0; b < batches; ++b) {
    Vec num = Vec::Zero(dim);
    double den = 0.0;
    for (int s = 0; s < batch_size; ++s) {
      const double u = rng.uniform01();
      const int k = (u < prior.weights[0]) ? 0 : 1;
      const GaussianPrior& comp = prior.components[static_cast<std::size_t>(k)];
      Vec x0(dim);
      double lw = 0.0;
      for (Eigen::Index i = 0; i < dim; ++i) {
        x0(i) = comp.mean(i) + std::sqrt(comp.var(i)) * rng.normal();
        const double r = x_tau(i) - a * x0(i);
        lw -= r * r / (2.0 * tau * tau);
      }
      const double w = std::exp(lw);
      num += w * x0;
      den += w;
    }
    if (den == 0.0) throw std::runtime_error("oracle: Monte Carlo weights underflowed");
    batch_means.row(b) = (num / den).transpose();
  }

  double worst = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double mean = batch_means.col(i).mean();
    const double var =
        (batch_means.col(i).array() - mean).square().sum() / (batches - 1);
    const double se = std::sqrt(var / batches);
    worst = std::max(worst, std::abs(exact(i) - mean) / se);
  }

  res.value = worst;
  res.pass = worst <= res.bound;
  res.detail = std::to_string(static_cast<long long>(batches) * batch_size) +
               " prior draws in " + std::to_string(batches) + " batches";
  return res;
}

OracleResult oracle_encoder_jacobian_fd() {
  OracleResult res;
  res.name = "encoder-jacobian-vs-finite-differences";
  res.bound = 1e-4;

  const int input_dim = 8, embed_dim = 8;
  const FrameEncoder enc = FrameEncoder::fixed_nonlinear(input_dim, embed_dim, 424242);
  RngStream rng(77);
  const Vec f = rng.normal_vec(input_dim);

  const Mat ja = enc.jacobian(f);
  const double h = 1e-5;
  Mat jf(embed_dim, input_dim);
  for (int j = 0; j < input_dim; ++j) {
    Vec fp = f, fm = f;
    fp(j) += h;
    fm(j) -= h;
    jf.col(j) = (enc.encode(fp) - enc.encode(fm)) / (2.0 * h);
  }
  const double rel_fro = (ja - jf).norm() / std::max(1e-12, ja.norm());

  // The quantity the density metric actually consumes: sum of log singular
  // values.
  auto logsum = [](const Mat& m) {
    const Eigen::JacobiSVD<Mat> svd(m);
    double s = 0.0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      s += std::log(std::max(svd.singularValues()(i), 1e-12));
    }
    return s;
  };
  const double la = logsum(ja), lf = logsum(jf);
  const double rel_logsum = std::abs(la - lf) / std::max(1.0, std::abs(la));

  res.value = std::max(rel_fro, rel_logsum);
  res.pass = res.value <= res.bound;
  res.detail = "Frobenius rel = " + fmt3(rel_fro) + ", log-volume rel = " + fmt3(rel_logsum);
  return res;
}

OracleResult oracle_tto_gradient_fd() {
  OracleResult res;
  res.name = "adapter-gradient-analytic-vs-fd";
  res.bound = 1e-5;

  const WorldSpec world = make_default_world();
  const Eigen::Index dim = world.chunk_dim();
  const NoiseSchedule sched = make_rf_schedule({1.0});
  const DenoiserPtr inner = make_mixture_denoiser();

  ChunkContext ctx(3);
  RngStream setup(31337);
  ctx.push(world.init_prior().single().mean + setup.normal_vec(dim));

  RewardSpec reward;
  reward.kind = RewardKind::Reconstruction;
  reward.reference = world.init_prior().single().mean + 0.5 * setup.normal_vec(dim);

  AdapterSpec adapter = AdapterSpec::seeded(static_cast<int>(dim), 2, 8086);
  // Nonzero `up` as well, so both gradient blocks are exercised.
  for (Eigen::Index i = 0; i < adapter.up.rows(); ++i) {
    for (Eigen::Index j = 0; j < adapter.up.cols(); ++j) {
      adapter.up(i, j) = 0.05 * setup.normal();
    }
  }

  const RngStream iter_stream(555);
  const TtoGradient ga =
      tto_reward_gradient(inner, adapter, reward, world, ctx, sched, iter_stream, true);
  const TtoGradient gf =
      tto_reward_gradient(inner, adapter, reward, world, ctx, sched, iter_stream, false);

  const double max_diff = std::max((ga.up - gf.up).cwiseAbs().maxCoeff(),
                                   (ga.down - gf.down).cwiseAbs().maxCoeff());
  const double scale =
      std::max(1.0, std::max(ga.up.cwiseAbs().maxCoeff(), ga.down.cwiseAbs().maxCoeff()));

  res.value = max_diff / scale;
  res.pass = res.value <= res.bound;
  res.detail = "max|analytic - fd| = " + fmt3(max_diff) + " at gradient scale " + fmt3(scale);
  return res;
}

std::vector<OracleResult> run_oracle_suite() {
  return {oracle_posterior_quadrature(), oracle_mixture_mc(), oracle_encoder_jacobian_fd(),
          oracle_tto_gradient_fd()};
}

}  // namespace ttclab
