#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ttclab/stats.hpp"

using namespace ttclab;

// Reference statistics and p-values below were frozen from scipy 1.15.3:
// scipy.stats.wilcoxon(a, b, zero_method='wilcox', correction=False).

TEST_CASE("stats: summarize uses the sample standard deviation") {
  const Summary s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.n == 4);
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.stddev == doctest::Approx(1.2909944487358056).epsilon(1e-14));
  CHECK(s.stderr_mean == doctest::Approx(0.6454972243679028).epsilon(1e-14));

  const Summary empty = summarize({});
  CHECK(empty.n == 0);
  CHECK(empty.mean == 0.0);
  CHECK(empty.stddev == 0.0);

  const Summary single = summarize({7.0});
  CHECK(single.n == 1);
  CHECK(single.mean == 7.0);
  CHECK(single.stddev == 0.0);
  CHECK(single.stderr_mean == 0.0);
}

TEST_CASE("stats: wilcoxon exact path, n = 8 without ties") {
  const std::vector<double> a = {1.10, 2.30, 0.50, 4.20, 3.30, 0.90, 1.70, 2.80};
  const std::vector<double> b = {0.80, 2.85, 0.12, 3.55, 3.91, 0.18, 2.62, 1.75};
  const WilcoxonResult r = wilcoxon_signed_rank(a, b);
  CHECK(r.exact);
  CHECK(r.n_effective == 8);
  CHECK(r.statistic == 22.0);
  CHECK(r.p_value == doctest::Approx(0.640625).epsilon(1e-14));
}

TEST_CASE("stats: wilcoxon falls back to the tie-corrected normal approximation") {
  const std::vector<double> a = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0};
  const std::vector<double> b = {1.5, 1.5, 3.5, 3.5, 5.5, 5.5, 6.0, 9.0, 8.0, 11.0};
  const WilcoxonResult r = wilcoxon_signed_rank(a, b);
  CHECK_FALSE(r.exact);
  CHECK(r.n_effective == 10);
  CHECK(r.statistic == doctest::Approx(27.5).epsilon(1e-14));
  CHECK(r.p_value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stats: wilcoxon drops zero differences before ranking") {
  const std::vector<double> a = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  const std::vector<double> b = {1.0, 2.5, 2.0, 4.0, 4.0, 7.0};
  const WilcoxonResult r = wilcoxon_signed_rank(a, b);
  CHECK(r.n_effective == 4);
  CHECK(r.statistic == 6.0);
  CHECK(r.p_value == doctest::Approx(0.7054569861112734).epsilon(1e-12));
}

TEST_CASE("stats: wilcoxon normal approximation at n = 30") {
  const std::vector<double> a = {-1.15, -1.11, 0.8,  -1.48, 1.86,  0.68, -0.52, 0.08,
                                 0.54,  -1.06, -0.0, 0.01,  0.47,  2.47, 0.1,   1.04,
                                 -0.95, 0.63,  -0.56, -0.12, 0.11, 1.03, -1.47, 1.08,
                                 0.31,  -0.05, 1.23, 0.35,  -0.4, -1.58};
  const std::vector<double> b = {-0.49, 0.39,  1.04, -0.54, 1.76, 1.28,  0.51, 0.22,
                                 0.41,  -0.24, -1.25, 1.43, 1.8,  2.04,  -0.62, 1.08,
                                 -0.52, 2.44,  0.35, 0.24,  1.42, 1.79,  -2.1,  1.03,
                                 -0.4,  -0.47, 1.41, 0.13,  1.37, -1.7};
  const WilcoxonResult r = wilcoxon_signed_rank(a, b);
  CHECK_FALSE(r.exact);
  CHECK(r.n_effective == 30);
  CHECK(r.statistic == 120.0);
  CHECK(r.p_value == doctest::Approx(0.02067111356691231).epsilon(1e-12));
}

TEST_CASE("stats: wilcoxon exact path, n = 5") {
  const std::vector<double> a = {2.0, 4.0, 1.0, 7.0, 5.5};
  const std::vector<double> b = {1.0, 6.1, 0.6, 3.0, 5.2};
  const WilcoxonResult r = wilcoxon_signed_rank(a, b);
  CHECK(r.exact);
  CHECK(r.n_effective == 5);
  CHECK(r.statistic == 11.0);
  CHECK(r.p_value == doctest::Approx(0.4375).epsilon(1e-14));
}

TEST_CASE("stats: wilcoxon hand-checkable three-pair case") {
  // Differences 1, 2, 3: all positive, W+ = 6, exact two-sided p = 2/8.
  const WilcoxonResult r = wilcoxon_signed_rank({2.0, 3.0, 4.0}, {1.0, 1.0, 1.0});
  CHECK(r.exact);
  CHECK(r.n_effective == 3);
  CHECK(r.statistic == 6.0);
  CHECK(r.p_value == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("stats: wilcoxon degenerate and invalid input") {
  const WilcoxonResult r = wilcoxon_signed_rank({1.0, 2.0}, {1.0, 2.0});
  CHECK(r.n_effective == 0);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);

  const WilcoxonResult empty = wilcoxon_signed_rank({}, {});
  CHECK(empty.n_effective == 0);
  CHECK(empty.p_value == 1.0);

  CHECK_THROWS_AS(wilcoxon_signed_rank({1.0}, {1.0, 2.0}), std::invalid_argument);
}
