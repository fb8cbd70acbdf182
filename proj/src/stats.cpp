#include "ttclab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ttclab {

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.n = static_cast<int>(xs.size());
  if (s.n == 0) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / (s.n - 1));
    s.stderr_mean = s.stddev / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: length mismatch");

  std::vector<double> diffs;
  diffs.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }

  WilcoxonResult res;
  res.n_effective = static_cast<int>(diffs.size());
  if (diffs.empty()) return res;  // no information: p = 1

  const int n = res.n_effective;
  std::vector<int> order(diffs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return std::abs(diffs[static_cast<std::size_t>(i)]) <
           std::abs(diffs[static_cast<std::size_t>(j)]);
  });

  // Average ranks over tied |differences|; track tie group sizes for the
  // variance correction of the normal approximation.
  std::vector<double> rank(diffs.size());
  bool has_ties = false;
  double tie_term = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    const double v = std::abs(diffs[static_cast<std::size_t>(order[i])]);
    while (j < order.size() && std::abs(diffs[static_cast<std::size_t>(order[j])]) == v) ++j;
    const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) rank[static_cast<std::size_t>(order[k])] = avg;
    const double t = static_cast<double>(j - i);
    if (t > 1.0) {
      has_ties = true;
      tie_term += t * t * t - t;
    }
    i = j;
  }

  double w_plus = 0.0;
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    if (diffs[i] > 0.0) w_plus += rank[i];
  }
  res.statistic = w_plus;

  if (n <= 25 && !has_ties) {
    // Exact null distribution of W+ by subset-sum counting over ranks 1..n.
    res.exact = true;
    const int wmax = n * (n + 1) / 2;
    std::vector<double> f(static_cast<std::size_t>(wmax) + 1, 0.0);
    f[0] = 1.0;
    for (int r = 1; r <= n; ++r) {
      for (int w = wmax; w >= r; --w) f[static_cast<std::size_t>(w)] += f[static_cast<std::size_t>(w - r)];
    }
    const double total = std::ldexp(1.0, n);  // 2^n
    const int w = static_cast<int>(std::llround(w_plus));
    double cdf = 0.0, sf = 0.0;
    for (int i = 0; i <= wmax; ++i) {
      if (i <= w) cdf += f[static_cast<std::size_t>(i)];
      if (i >= w) sf += f[static_cast<std::size_t>(i)];
    }
    res.p_value = std::min(1.0, 2.0 * std::min(cdf, sf) / total);
    return res;
  }

  // Normal approximation with tie correction (matches the common convention
  // of no continuity correction).
  const double mean = n * (n + 1) / 4.0;
  const double var = n * (n + 1) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  if (var <= 0.0) {
    res.p_value = 1.0;
    return res;
  }
  const double z = (w_plus - mean) / std::sqrt(var);
  res.p_value = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
  return res;
}

}  // namespace ttclab
