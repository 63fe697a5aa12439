#include "tear/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "tear/errors.hpp"

namespace tear {

std::string to_string(KendallVariant v) {
  switch (v) {
    case KendallVariant::tau_a: return "tau_a";
    case KendallVariant::tau_b: return "tau_b";
    case KendallVariant::tau_c: return "tau_c";
  }
  return "tau_b";
}

KendallVariant parse_kendall_variant(std::string_view s) {
  if (s == "tau_a" || s == "a") return KendallVariant::tau_a;
  if (s == "tau_b" || s == "b") return KendallVariant::tau_b;
  if (s == "tau_c" || s == "c") return KendallVariant::tau_c;
  throw ConfigError("unknown Kendall variant '" + std::string(s) + "'");
}

std::string to_string(KendallGrouping g) {
  switch (g) {
    case KendallGrouping::global: return "global";
    case KendallGrouping::by_system: return "by_system";
    case KendallGrouping::by_segment: return "by_segment";
  }
  return "global";
}

KendallGrouping parse_kendall_grouping(std::string_view s) {
  if (s == "global") return KendallGrouping::global;
  if (s == "by_system") return KendallGrouping::by_system;
  if (s == "by_segment") return KendallGrouping::by_segment;
  throw ConfigError("unknown Kendall grouping '" + std::string(s) + "'");
}

namespace {

using i64 = long long;

i64 tied_pairs(const std::vector<double>& sorted) {
  i64 total = 0, run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

// Sorts v ascending, returning the number of inversions.
i64 merge_count(std::vector<double>& v, std::vector<double>& tmp, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  i64 swaps = merge_count(v, tmp, lo, mid) + merge_count(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<i64>(mid - i);
      tmp[k++] = v[j++];
    } else {
      tmp[k++] = v[i++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo), tmp.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

std::size_t distinct(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

}  // namespace

double kendall_tau(const std::vector<double>& a, const std::vector<double>& b, KendallVariant variant) {
  if (a.size() != b.size()) throw LengthMismatch("kendall_tau: lists differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw DegenerateInput("kendall_tau needs at least 2 items");

  // Knight's algorithm: sort by (a, b), count joint and a-ties, then count
  // discordant pairs as inversions in b.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a[x] < a[y] || (a[x] == a[y] && b[x] < b[y]);
  });
  std::vector<double> sa(n), sb(n);
  for (std::size_t i = 0; i < n; ++i) {
    sa[i] = a[order[i]];
    sb[i] = b[order[i]];
  }
  const i64 n0 = static_cast<i64>(n) * static_cast<i64>(n - 1) / 2;
  const i64 n1 = tied_pairs(sa);
  i64 n3 = 0;
  {
    i64 run = 1;
    for (std::size_t i = 1; i <= n; ++i) {
      if (i < n && sa[i] == sa[i - 1] && sb[i] == sb[i - 1]) {
        ++run;
      } else {
        n3 += run * (run - 1) / 2;
        run = 1;
      }
    }
  }
  std::vector<double> tmp(n);
  const i64 swaps = merge_count(sb, tmp, 0, n);
  const i64 n2 = tied_pairs(sb);  // sb is sorted now
  if (n1 == n0 || n2 == n0) throw DegenerateInput("kendall_tau is undefined for a constant list");

  const double s = static_cast<double>(n0 - n1 - n2 + n3 - 2 * swaps);  // concordant - discordant
  switch (variant) {
    case KendallVariant::tau_a: return s / static_cast<double>(n0);
    case KendallVariant::tau_b:
      return s / std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
    case KendallVariant::tau_c: {
      const double m = static_cast<double>(std::min(distinct(a), distinct(b)));
      const double nn = static_cast<double>(n);
      return 2.0 * s / (nn * nn * (m - 1.0) / m);
    }
  }
  return s / static_cast<double>(n0);
}

double kendall_average(const std::vector<double>& a, const std::vector<double>& b) {
  return (kendall_tau(a, b, KendallVariant::tau_a) + kendall_tau(a, b, KendallVariant::tau_b) +
          kendall_tau(a, b, KendallVariant::tau_c)) /
         3.0;
}

SystemEvalTable SystemEvalTable::align(const Cells& metric, const Cells& human) {
  std::set<std::string> systems, segments;
  for (const auto& [k, v] : metric) {
    systems.insert(k.first);
    segments.insert(k.second);
  }
  for (const auto& [k, v] : human) {
    systems.insert(k.first);
    segments.insert(k.second);
  }
  SystemEvalTable t;
  t.systems.assign(systems.begin(), systems.end());
  for (const auto& seg : segments) {
    bool complete = true;
    for (const auto& sys : t.systems)
      if (!metric.count({sys, seg}) || !human.count({sys, seg})) complete = false;
    if (complete) t.segments.push_back(seg);
    else ++t.dropped_segments;
  }
  t.metric.assign(t.systems.size(), {});
  t.human.assign(t.systems.size(), {});
  for (std::size_t s = 0; s < t.systems.size(); ++s) {
    for (const auto& seg : t.segments) {
      t.metric[s].push_back(metric.at({t.systems[s], seg}));
      t.human[s].push_back(human.at({t.systems[s], seg}));
    }
  }
  return t;
}

namespace {

std::vector<double> row_means(const std::vector<std::vector<double>>& rows) {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.empty()) throw EmptyCorpus("system has no aligned segments");
    out.push_back(std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size()));
  }
  return out;
}

int sign(double x) { return (x > 0) - (x < 0); }

}  // namespace

std::vector<double> SystemEvalTable::system_metric_means() const { return row_means(metric); }
std::vector<double> SystemEvalTable::system_human_means() const { return row_means(human); }

double pairwise_accuracy(const std::vector<double>& m, const std::vector<double>& h) {
  if (m.size() != h.size()) throw LengthMismatch("pairwise_accuracy: score lists differ in length");
  if (m.size() < 2) throw TooFewSystems("pairwise accuracy needs at least 2 systems");
  std::size_t agree = 0, pairs = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      ++pairs;
      if (sign(m[i] - m[j]) == sign(h[i] - h[j])) ++agree;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(pairs);
}

double pairwise_accuracy(const SystemEvalTable& table) {
  if (table.systems.size() < 2) throw TooFewSystems("pairwise accuracy needs at least 2 systems");
  return pairwise_accuracy(table.system_metric_means(), table.system_human_means());
}

double segment_kendall(const SystemEvalTable& t, KendallVariant variant, KendallGrouping grouping) {
  if (grouping == KendallGrouping::global) {
    std::vector<double> m, h;
    for (std::size_t s = 0; s < t.systems.size(); ++s) {
      m.insert(m.end(), t.metric[s].begin(), t.metric[s].end());
      h.insert(h.end(), t.human[s].begin(), t.human[s].end());
    }
    return kendall_tau(m, h, variant);
  }
  double sum = 0.0;
  std::size_t groups = 0;
  auto add = [&](const std::vector<double>& m, const std::vector<double>& h) {
    try {
      sum += kendall_tau(m, h, variant);
      ++groups;
    } catch (const DegenerateInput&) {
    }
  };
  if (grouping == KendallGrouping::by_system) {
    for (std::size_t s = 0; s < t.systems.size(); ++s) add(t.metric[s], t.human[s]);
  } else {
    for (std::size_t k = 0; k < t.segments.size(); ++k) {
      std::vector<double> m, h;
      for (std::size_t s = 0; s < t.systems.size(); ++s) {
        m.push_back(t.metric[s][k]);
        h.push_back(t.human[s][k]);
      }
      add(m, h);
    }
  }
  if (groups == 0) throw DegenerateInput("no group has a defined Kendall correlation");
  return sum / static_cast<double>(groups);
}

void validate(const RankingVector& r) {
  if (r.entities.size() != r.ranks.size()) throw ValidationError("ranking: entities and ranks differ in length");
  std::vector<int> sorted = r.ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (sorted[i] != static_cast<int>(i + 1)) throw ValidationError("ranking: ranks must be a permutation of 1..n");
  std::set<std::string> names(r.entities.begin(), r.entities.end());
  if (names.size() != r.entities.size()) throw ValidationError("ranking: duplicate entity");
}

RankingVector ranks_from_scores(const std::vector<std::string>& entities, const std::vector<double>& scores,
                                bool higher_is_better) {
  if (entities.size() != scores.size()) throw LengthMismatch("ranks_from_scores: lengths differ");
  std::vector<std::size_t> order(entities.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return higher_is_better ? scores[x] > scores[y] : scores[x] < scores[y];
  });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (scores[order[i]] == scores[order[i - 1]]) throw DegenerateInput("tied scores cannot be ranked");
  RankingVector r{entities, std::vector<int>(entities.size())};
  for (std::size_t i = 0; i < order.size(); ++i) r.ranks[order[i]] = static_cast<int>(i + 1);
  return r;
}

double ranking_correlation(const RankingVector& r1, const RankingVector& r2, KendallVariant variant) {
  validate(r1);
  validate(r2);
  if (r1.entities.size() < 2) throw DegenerateInput("ranking correlation needs at least 2 entities");
  std::set<std::string> e1(r1.entities.begin(), r1.entities.end()), e2(r2.entities.begin(), r2.entities.end());
  if (e1 != e2) throw EntityMismatch("rankings cover different entities");
  std::vector<double> a, b;
  for (std::size_t i = 0; i < r1.entities.size(); ++i) {
    a.push_back(r1.ranks[i]);
    auto it = std::find(r2.entities.begin(), r2.entities.end(), r1.entities[i]);
    b.push_back(r2.ranks[static_cast<std::size_t>(it - r2.entities.begin())]);
  }
  return kendall_tau(a, b, variant);
}

}  // namespace tear
