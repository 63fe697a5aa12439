#include "tear/analysis.hpp"

#include <set>

#include "tear/errors.hpp"
#include "tear/util.hpp"

namespace tear {

std::map<std::string, DeltaBucket> delta_by_error_type(const std::map<std::string, double>& before,
                                                       const std::map<std::string, double>& after,
                                                       const std::map<std::string, EstimationResult>& estimations) {
  auto same_keys = [](const auto& x, const auto& y) {
    if (x.size() != y.size()) return false;
    for (auto i = x.begin(), j = y.begin(); i != x.end(); ++i, ++j)
      if (i->first != j->first) return false;
    return true;
  };
  if (!same_keys(before, after) || !same_keys(before, estimations))
    throw AlignmentError("before/after scores and estimations cover different segments");

  struct Acc {
    double before = 0, after = 0;
    std::size_t n = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& [id, est] : estimations) {
    std::set<std::string> types;
    for (const auto& a : est.annotations)
      if (a.category.top != "no_error") types.insert(a.category.label());
    for (const auto& t : types) {
      auto& b = acc[t];
      b.before += before.at(id);
      b.after += after.at(id);
      ++b.n;
    }
  }
  std::map<std::string, DeltaBucket> out;
  for (const auto& [type, a] : acc) {
    DeltaBucket b;
    b.count = a.n;
    b.mean_before = a.before / static_cast<double>(a.n);
    b.mean_after = a.after / static_cast<double>(a.n);
    b.mean_delta = b.mean_after - b.mean_before;
    out[type] = b;
  }
  return out;
}

std::size_t ErrorHistogram::of(Severity s, const std::string& label) const {
  auto it = counts.find({s, label});
  return it == counts.end() ? 0 : it->second;
}

std::size_t ErrorHistogram::of_severity(Severity s) const {
  std::size_t n = 0;
  for (const auto& [k, v] : counts)
    if (k.first == s) n += v;
  return n;
}

ErrorHistogram error_count_histogram(const std::vector<EstimationResult>& estimations) {
  ErrorHistogram h;
  for (const auto& e : estimations) {
    for (const auto& a : e.annotations) {
      ++h.counts[{a.severity, a.category.label()}];
      ++h.total;
    }
  }
  return h;
}

std::string to_string(Choice c) {
  switch (c) {
    case Choice::A: return "A";
    case Choice::B: return "B";
    case Choice::tie: return "tie";
  }
  return "tie";
}

Choice parse_choice(std::string_view s) {
  const std::string t = to_lower_ascii(s);
  if (t == "a") return Choice::A;
  if (t == "b") return Choice::B;
  if (t == "tie") return Choice::tie;
  throw ValidationError("choice must be A, B or tie, got '" + std::string(s) + "'");
}

namespace {
double pct(std::size_t part, std::size_t total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(total);
}
}  // namespace

double WinTieLoss::pct_first() const { return pct(first_wins, total()); }
double WinTieLoss::pct_tie() const { return pct(ties, total()); }
double WinTieLoss::pct_second() const { return pct(second_wins, total()); }

WinTieLoss win_tie_loss(const std::vector<PreferenceJudgment>& judgments,
                        const std::map<std::string, std::string>& side_map, const std::string& first_system,
                        const std::string& second_system) {
  if (first_system == second_system) throw ValidationError("win_tie_loss needs two different systems");
  WinTieLoss out;
  out.first_system = first_system;
  out.second_system = second_system;
  for (const auto& j : judgments) {
    auto it = side_map.find(j.pair_id);
    if (it == side_map.end()) throw UnknownPair("no side assignment for pair '" + j.pair_id + "'");
    const std::string& shown_a = it->second;
    if (shown_a != first_system && shown_a != second_system)
      throw ValidationError("pair '" + j.pair_id + "' maps to unknown system '" + shown_a + "'");
    if (j.choice == Choice::tie) {
      ++out.ties;
      continue;
    }
    const bool a_won = j.choice == Choice::A;
    const bool first_is_a = shown_a == first_system;
    if (a_won == first_is_a) ++out.first_wins;
    else ++out.second_wins;
  }
  return out;
}

}  // namespace tear
