#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tear/core.hpp"

namespace tear {

enum class PromptKind {
  translate_zero,
  translate_few,
  estimate_zero,
  estimate_few,
  refine_alpha,
  refine_beta,
  scot_baseline,
  contrastive_baseline,
};

inline constexpr std::array<PromptKind, 8> kAllPromptKinds = {
    PromptKind::translate_zero, PromptKind::translate_few, PromptKind::estimate_zero,
    PromptKind::estimate_few,   PromptKind::refine_alpha,  PromptKind::refine_beta,
    PromptKind::scot_baseline,  PromptKind::contrastive_baseline};

std::string to_string(PromptKind kind);
PromptKind parse_prompt_kind(std::string_view name);

// Every placeholder name any template may use (without braces).
const std::vector<std::string>& known_placeholders();

struct RenderedPrompt {
  PromptKind kind{};
  std::string text;
  std::map<std::string, std::string> placeholders_filled;
};

// One template text per PromptKind, keyed by "<kind>.txt".
class TemplateStore {
 public:
  // The copies compiled into the library from data/templates.
  static const TemplateStore& builtin();
  // Loads <dir>/<kind>.txt for every kind; TemplateError if any is missing.
  static TemplateStore load(const std::filesystem::path& dir);

  const std::string& get(PromptKind kind) const;

 private:
  std::map<PromptKind, std::string> texts_;
};

// Substitutes {name} markers in one left-to-right pass; substituted values are
// never rescanned. PlaceholderError when a known placeholder has no value.
RenderedPrompt render_template(PromptKind kind, std::string_view tmpl,
                               const std::map<std::string, std::string>& values);

// Deterministic for (pool, k, seed); the returned items keep pool order.
ExemplarSet select_exemplars(const std::vector<Exemplar>& pool, const LanguagePair& pair, std::size_t k,
                             std::int64_t seed);

// Two-column tsv with a "source\ttarget" header.
std::vector<Exemplar> parse_exemplar_pool(std::string_view tsv);
std::vector<Exemplar> load_exemplar_pool(const std::filesystem::path& path);
// The bundled pool for a pair, e.g. data/exemplars/zh-en.tsv; empty if none ships.
std::vector<Exemplar> builtin_exemplar_pool(const LanguagePair& pair);

inline constexpr std::size_t kTranslateShots = 5;
inline constexpr std::size_t kEstimateShots = 3;

RenderedPrompt build_translate_prompt(const Segment& segment, const std::optional<ExemplarSet>& exemplars,
                                      const TemplateStore& store = TemplateStore::builtin());

RenderedPrompt build_estimate_prompt(std::string_view source, std::string_view translation,
                                     const LanguagePair& pair, int shots,
                                     const TemplateStore& store = TemplateStore::builtin());

RenderedPrompt build_refine_prompt(RefineVariant variant, std::string_view source, std::string_view initial,
                                   std::string_view feedback, const LanguagePair& pair,
                                   const std::optional<ExemplarSet>& exemplars,
                                   const TemplateStore& store = TemplateStore::builtin());

enum class BaselineKind { it_only, scot, contrastive };
std::string to_string(BaselineKind kind);
BaselineKind parse_baseline_kind(std::string_view name);

// kind must be scot or contrastive.
RenderedPrompt build_baseline_prompt(BaselineKind kind, std::string_view source, std::string_view initial,
                                     const LanguagePair& pair,
                                     const TemplateStore& store = TemplateStore::builtin());

}  // namespace tear
