#pragma once

#include <vector>

namespace ttclab {

struct Summary {
  int n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample std, N-1
  double stderr_mean = 0.0;
};

Summary summarize(const std::vector<double>& xs);

struct WilcoxonResult {
  double statistic = 0.0;  // W+ (rank sum of positive differences)
  double p_value = 1.0;    // two-sided
  int n_effective = 0;     // pairs with nonzero difference
  bool exact = false;
};

/// Paired two-sided Wilcoxon signed-rank test on a vs b. Zero differences
/// are dropped; ties among |differences| get average ranks. The exact
/// distribution is used for n <= 25 when the nonzero |differences| are
/// tie-free, otherwise the normal approximation with tie correction (no
/// continuity correction). All differences zero gives p = 1.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ttclab
