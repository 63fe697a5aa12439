#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tear {

enum class Severity { critical = 0, major = 1, minor = 2 };

std::string to_string(Severity s);
std::optional<Severity> parse_severity(std::string_view token);

struct ErrorCategory {
  std::string top;                 // e.g. "accuracy", "locale_convention", "other"
  std::optional<std::string> sub;  // e.g. "mistranslation"
  // Set when an unknown label was remapped to `other`; holds the label as seen.
  std::optional<std::string> raw_label;

  // "accuracy/mistranslation", or "accuracy" without a sub.
  std::string label() const;
  friend bool operator==(const ErrorCategory&, const ErrorCategory&) = default;
  friend auto operator<=>(const ErrorCategory&, const ErrorCategory&) = default;
};

struct ErrorAnnotation {
  Severity severity = Severity::minor;
  ErrorCategory category;
  std::optional<std::string> span;
  friend bool operator==(const ErrorAnnotation&, const ErrorAnnotation&) = default;
};

inline constexpr std::size_t kMaxAnnotations = 5;

// Warning codes reported in EstimationResult::parse_warnings. Warnings that
// carry detail use "<code>:<detail>".
namespace warning {
inline constexpr std::string_view parse_failed = "parse_failed";
inline constexpr std::string_view clamped = "clamped";
inline constexpr std::string_view remapped = "remapped";
inline constexpr std::string_view ignored_text = "ignored_text";
inline constexpr std::string_view non_translation_exclusive = "non_translation_exclusive";
}  // namespace warning

struct EstimationResult {
  std::vector<ErrorAnnotation> annotations;
  bool needs_refinement = false;
  std::string raw_text;
  std::vector<std::string> parse_warnings;

  bool has_warning(std::string_view code) const;
};

// The refinement gate: any annotation whose top category is not no_error.
bool needs_refinement(const std::vector<ErrorAnnotation>& annotations);

// The MQM error hierarchy: (top, sub) pairs with descriptions.
class Taxonomy {
 public:
  struct Entry {
    std::string top;
    std::string sub;  // empty for top-level-only categories
    std::string description;
  };

  static const Taxonomy& builtin();
  static Taxonomy parse(std::string_view tsv);
  static Taxonomy load(const std::filesystem::path& path);

  bool contains(std::string_view top, std::optional<std::string_view> sub) const;
  bool has_top(std::string_view top) const;
  const std::vector<Entry>& entries() const { return entries_; }

  // Maps a free-form label ("Accuracy/Untranslated text", "locale convention/name format")
  // onto the hierarchy. Unknown labels come back as `other` with raw_label set.
  ErrorCategory classify(std::string_view label) const;

  // Human-readable label that classify() maps back to the same category.
  static std::string display(const ErrorCategory& category);

 private:
  std::vector<Entry> entries_;
};

// Never throws. Unparseable text gives no annotations, needs_refinement=false
// and a parse_failed warning.
EstimationResult parse_estimation(std::string_view raw_text, const Taxonomy& taxonomy = Taxonomy::builtin());

// Canonical three-line "critical: ...\nmajor: ...\nminor: ..." layout.
std::string serialize_feedback(const EstimationResult& result);
std::string serialize_feedback(const std::vector<ErrorAnnotation>& annotations);

struct SeverityWeights {
  double critical = 25.0;
  double major = 5.0;
  double minor = 1.0;

  double of(Severity s) const;
  friend bool operator==(const SeverityWeights&, const SeverityWeights&) = default;
};

inline constexpr double kDefaultScoreCap = 25.0;

struct MQMScore {
  double value = 0.0;  // <= 0
  SeverityWeights weights_used;
  bool capped = false;
  friend bool operator==(const MQMScore&, const MQMScore&) = default;
};

// value = -sum(weights); with a cap, value = max(-cap, value). WeightError on
// non-positive weights or cap.
MQMScore mqm_score(const std::vector<ErrorAnnotation>& annotations, const SeverityWeights& weights = {},
                   std::optional<double> cap = std::nullopt);

// One row of a human MQM annotation dump (simplified schema).
struct MqmRow {
  std::string system;
  std::string segment_id;
  std::string severity;  // critical | major | minor | no-error | missing
  std::string category;
  std::optional<std::string> span;
  std::size_t line = 0;  // source line, for error messages
};

using SystemSegmentKey = std::pair<std::string, std::string>;  // (system, segment)

struct HumanMqmScores {
  std::map<SystemSegmentKey, MQMScore> scores;
  std::size_t excluded = 0;  // (system, segment) cells dropped for missing annotations
};

// FormatError (with the row's line) on an unknown severity token.
HumanMqmScores load_human_mqm(const std::vector<MqmRow>& rows, const SeverityWeights& weights = {},
                              std::optional<double> cap = std::nullopt,
                              const Taxonomy& taxonomy = Taxonomy::builtin());

}  // namespace tear
