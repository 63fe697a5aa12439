#pragma once

// Domain types shared by the pipeline. Everything here is a plain value with
// pure validation; serialization lives in corpus.hpp.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tear {

// ISO-639-1 code -> English language name. Seeded with the ten default
// languages; callers may register more.
class LanguageRegistry {
 public:
  static LanguageRegistry& instance();

  bool contains(std::string_view code) const;
  // Throws ValidationError for unknown codes.
  const std::string& name(std::string_view code) const;
  void add(std::string code, std::string name);
  std::vector<std::string> codes() const;

 private:
  LanguageRegistry();
  std::map<std::string, std::string, std::less<>> names_;
};

struct LanguagePair {
  std::string source_lang;
  std::string target_lang;

  std::string source_name() const;
  std::string target_name() const;
  // "zh-en"
  std::string tag() const;
  static LanguagePair parse(std::string_view tag);

  friend bool operator==(const LanguagePair&, const LanguagePair&) = default;
};

void validate(const LanguagePair& pair);

struct Segment {
  std::string id;
  LanguagePair pair;
  std::string source_text;
  std::optional<std::string> reference_text;
  std::optional<std::string> doc_id;

  friend bool operator==(const Segment&, const Segment&) = default;
};

void validate(const Segment& segment);
// Also checks id uniqueness across the list.
void validate(const std::vector<Segment>& segments);

struct Exemplar {
  std::string source;
  std::string target;
  friend bool operator==(const Exemplar&, const Exemplar&) = default;
};

struct ExemplarSet {
  LanguagePair pair;
  std::vector<Exemplar> items;
  friend bool operator==(const ExemplarSet&, const ExemplarSet&) = default;
};

// Throws ExemplarLeakage if an exemplar source equals a test source.
void check_no_leakage(const ExemplarSet& exemplars, const std::vector<Segment>& testset);

enum class DraftStage { initial, refined };

struct TranslationDraft {
  std::string segment_id;
  std::string text;
  DraftStage stage = DraftStage::initial;
  int iteration = 0;  // 0 for initial, >= 1 for refined
  std::string producer_model;
  std::string prompt_kind;

  friend bool operator==(const TranslationDraft&, const TranslationDraft&) = default;
};

// Checks one initial draft first, then refined drafts numbered 1..n.
void validate_drafts(const TranslationDraft& initial, const std::vector<TranslationDraft>& refined);

enum class RefineVariant { alpha, beta };

std::string to_string(RefineVariant v);
RefineVariant parse_refine_variant(std::string_view s);

struct Decoding {
  double temperature = 0.0;
  int max_tokens = 1024;
  friend bool operator==(const Decoding&, const Decoding&) = default;
};

struct RunConfig {
  std::string translate_model;
  std::string estimate_model;
  std::string refine_model;
  int translate_shots = 5;
  int estimate_shots = 3;
  RefineVariant refine_variant = RefineVariant::beta;
  int max_iterations = 1;
  // Keep refining for max_iterations rounds even when estimation reports no errors.
  bool force_iterations = false;
  std::int64_t sample_seed = 0;
  Decoding decoding;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Returns config unchanged when valid; ConfigError names the violated invariant.
RunConfig validate_run_config(const RunConfig& config);

// Trim both ends and collapse internal whitespace runs to one space.
std::string normalize_whitespace(std::string_view text);
std::string trim(std::string_view text);

}  // namespace tear
