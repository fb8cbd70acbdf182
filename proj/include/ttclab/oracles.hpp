#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ttclab {

/// One independent cross-check of a closed-form quantity. `value` is the
/// measured discrepancy in the oracle's own units; pass means
/// value <= bound.
struct OracleResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double bound = 0.0;
  std::string detail;
};

/// Gaussian posterior mean vs Simpson quadrature of the Bayes integral
/// (plus one frozen hand-computed case).
OracleResult oracle_posterior_quadrature();

/// Mixture posterior mean vs self-normalized Monte Carlo with the prior as
/// proposal; pass when every coordinate agrees within 3 batch standard
/// errors.
OracleResult oracle_mixture_mc(std::uint64_t seed = 99991, int batches = 100,
                               int batch_size = 100000);

/// Encoder Jacobian (and its singular-value log-sum) vs central finite
/// differences.
OracleResult oracle_encoder_jacobian_fd();

/// Analytic adapter gradient in the single-level reconstruction case vs
/// central finite differences of the same reward map.
OracleResult oracle_tto_gradient_fd();

/// All of the above, in a fixed order.
std::vector<OracleResult> run_oracle_suite();

}  // namespace ttclab
