#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tear {

enum class KendallVariant { tau_a, tau_b, tau_c };
std::string to_string(KendallVariant v);
KendallVariant parse_kendall_variant(std::string_view s);

// O(n log n). LengthMismatch for unequal lengths, DegenerateInput for
// fewer than 2 items or a constant list.
double kendall_tau(const std::vector<double>& a, const std::vector<double>& b,
                   KendallVariant variant = KendallVariant::tau_b);

// Mean of tau_a, tau_b and tau_c.
double kendall_average(const std::vector<double>& a, const std::vector<double>& b);

// Per-system x per-segment metric and human scores over the segments every
// system has (complete-case alignment).
struct SystemEvalTable {
  std::vector<std::string> systems;
  std::vector<std::string> segments;
  std::vector<std::vector<double>> metric;  // [system][segment]
  std::vector<std::vector<double>> human;   // [system][segment]
  std::size_t dropped_segments = 0;

  using Cells = std::map<std::pair<std::string, std::string>, double>;  // (system, segment) -> score
  static SystemEvalTable align(const Cells& metric, const Cells& human);

  std::vector<double> system_metric_means() const;
  std::vector<double> system_human_means() const;
};

// Fraction of system pairs whose metric and human mean differences have the
// same sign (a zero difference agrees only with a zero difference).
// TooFewSystems for fewer than 2 systems.
double pairwise_accuracy(const SystemEvalTable& table);
double pairwise_accuracy(const std::vector<double>& metric_system_scores,
                         const std::vector<double>& human_system_scores);

enum class KendallGrouping { global, by_system, by_segment };
std::string to_string(KendallGrouping g);
KendallGrouping parse_kendall_grouping(std::string_view s);

// Segment-level Kendall between metric and human scores. `global` pools every
// cell; the grouped variants average per-group values, skipping groups that
// are constant on either side. DegenerateInput if nothing remains.
double segment_kendall(const SystemEvalTable& table, KendallVariant variant = KendallVariant::tau_b,
                       KendallGrouping grouping = KendallGrouping::global);

struct RankingVector {
  std::vector<std::string> entities;
  std::vector<int> ranks;  // 1 = best, a permutation of 1..n
};

void validate(const RankingVector& r);
// Ranks by score (higher is better unless `higher_is_better` is false).
// Ties are rejected with DegenerateInput.
RankingVector ranks_from_scores(const std::vector<std::string>& entities, const std::vector<double>& scores,
                                bool higher_is_better = true);

// kendall_tau over the two rank vectors aligned by entity. EntityMismatch
// when the entity sets differ.
double ranking_correlation(const RankingVector& r1, const RankingVector& r2,
                           KendallVariant variant = KendallVariant::tau_b);

}  // namespace tear
