#pragma once

// Brute-force reference implementations, deliberately naive.

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "tear/stats.hpp"

namespace tear::testing {

inline int sign(double x) { return (x > 0) - (x < 0); }

// Over all C(n,2) system pairs: count pairs where the metric and human
// differences have the same sign.
inline double brute_pairwise_accuracy(const std::vector<double>& m, const std::vector<double>& h) {
  std::size_t agree = 0, pairs = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      ++pairs;
      if (sign(m[i] - m[j]) == sign(h[i] - h[j])) ++agree;
    }
  return static_cast<double>(agree) / static_cast<double>(pairs);
}

// nullopt where the statistic is undefined (a constant list).
inline std::optional<double> brute_kendall(const std::vector<double>& x, const std::vector<double>& y,
                                           KendallVariant v) {
  const std::size_t n = x.size();
  long conc = 0, disc = 0, tie_x = 0, tie_y = 0, pairs = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      ++pairs;
      const int sx = sign(x[i] - x[j]);
      const int sy = sign(y[i] - y[j]);
      if (sx == 0) ++tie_x;
      if (sy == 0) ++tie_y;
      if (sx * sy > 0) ++conc;
      if (sx * sy < 0) ++disc;
    }
  if (n < 2 || tie_x == pairs || tie_y == pairs) return std::nullopt;
  const double s = static_cast<double>(conc - disc);
  switch (v) {
    case KendallVariant::tau_a: return s / static_cast<double>(pairs);
    case KendallVariant::tau_b:
      return s / std::sqrt(static_cast<double>(pairs - tie_x) * static_cast<double>(pairs - tie_y));
    case KendallVariant::tau_c: {
      const double m = static_cast<double>(std::min(std::set<double>(x.begin(), x.end()).size(),
                                                    std::set<double>(y.begin(), y.end()).size()));
      return 2.0 * s / (static_cast<double>(n * n) * (m - 1.0) / m);
    }
  }
  return std::nullopt;
}

}  // namespace tear::testing
