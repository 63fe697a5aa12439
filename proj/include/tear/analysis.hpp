#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tear/mqm.hpp"

namespace tear {

struct DeltaBucket {
  double mean_before = 0.0;
  double mean_after = 0.0;
  double mean_delta = 0.0;  // mean_after - mean_before
  std::size_t count = 0;
};

// Per estimated error type ("top/sub", or "top"), the mean score change over
// the segments whose estimation reported that type. A segment with k distinct
// types counts once in each of the k buckets. Types nobody reported are absent.
// AlignmentError unless the three maps cover the same segment ids.
std::map<std::string, DeltaBucket> delta_by_error_type(const std::map<std::string, double>& before,
                                                       const std::map<std::string, double>& after,
                                                       const std::map<std::string, EstimationResult>& estimations);

struct ErrorHistogram {
  std::map<std::pair<Severity, std::string>, std::size_t> counts;  // (severity, category label)
  std::size_t total = 0;

  std::size_t of(Severity s, const std::string& label) const;
  std::size_t of_severity(Severity s) const;
};

ErrorHistogram error_count_histogram(const std::vector<EstimationResult>& estimations);

enum class Choice { A, B, tie };
std::string to_string(Choice c);
Choice parse_choice(std::string_view s);

struct PreferenceJudgment {
  std::string pair_id;
  Choice choice = Choice::tie;
  std::string annotator_id;
  std::string timestamp;

  friend bool operator==(const PreferenceJudgment&, const PreferenceJudgment&) = default;
};

struct WinTieLoss {
  std::string first_system;
  std::string second_system;
  std::size_t first_wins = 0;
  std::size_t ties = 0;
  std::size_t second_wins = 0;
  std::size_t total() const { return first_wins + ties + second_wins; }
  double pct_first() const;
  double pct_tie() const;
  double pct_second() const;
};

// side_map: pair_id -> the system shown as candidate A; it must be one of the
// two named systems. UnknownPair for a judgment whose pair has no entry.
WinTieLoss win_tie_loss(const std::vector<PreferenceJudgment>& judgments,
                        const std::map<std::string, std::string>& side_map, const std::string& first_system,
                        const std::string& second_system);

}  // namespace tear
