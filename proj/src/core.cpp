#include "tear/core.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "tear/errors.hpp"

namespace tear {

LanguageRegistry::LanguageRegistry()
    : names_{{"en", "English"}, {"fr", "French"},  {"de", "German"},    {"cs", "Czech"},
             {"is", "Icelandic"}, {"zh", "Chinese"}, {"ja", "Japanese"}, {"ru", "Russian"},
             {"uk", "Ukrainian"}, {"he", "Hebrew"}} {}

LanguageRegistry& LanguageRegistry::instance() {
  static LanguageRegistry registry;
  return registry;
}

bool LanguageRegistry::contains(std::string_view code) const { return names_.find(code) != names_.end(); }

const std::string& LanguageRegistry::name(std::string_view code) const {
  auto it = names_.find(code);
  if (it == names_.end()) throw ValidationError("unknown language code '" + std::string(code) + "'");
  return it->second;
}

void LanguageRegistry::add(std::string code, std::string name) {
  if (code.empty() || name.empty()) throw ConfigError("language code and name must be non-empty");
  names_[std::move(code)] = std::move(name);
}

std::vector<std::string> LanguageRegistry::codes() const {
  std::vector<std::string> out;
  for (const auto& [code, _] : names_) out.push_back(code);
  return out;
}

std::string LanguagePair::source_name() const { return LanguageRegistry::instance().name(source_lang); }
std::string LanguagePair::target_name() const { return LanguageRegistry::instance().name(target_lang); }
std::string LanguagePair::tag() const { return source_lang + "-" + target_lang; }

LanguagePair LanguagePair::parse(std::string_view tag) {
  auto dash = tag.find('-');
  if (dash == std::string_view::npos) throw ValidationError("language pair '" + std::string(tag) + "' is not src-tgt");
  LanguagePair pair;
  for (char c : tag.substr(0, dash)) pair.source_lang += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (char c : tag.substr(dash + 1)) pair.target_lang += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  validate(pair);
  return pair;
}

void validate(const LanguagePair& pair) {
  const auto& reg = LanguageRegistry::instance();
  if (!reg.contains(pair.source_lang)) throw ValidationError("unknown source language '" + pair.source_lang + "'");
  if (!reg.contains(pair.target_lang)) throw ValidationError("unknown target language '" + pair.target_lang + "'");
  if (pair.source_lang == pair.target_lang) throw ValidationError("source and target language are both '" + pair.source_lang + "'");
}

void validate(const Segment& segment) {
  if (segment.id.empty()) throw ValidationError("segment id is empty");
  validate(segment.pair);
  if (trim(segment.source_text).empty()) throw ValidationError("segment " + segment.id + " has empty source text");
}

void validate(const std::vector<Segment>& segments) {
  std::set<std::string> seen;
  for (const auto& s : segments) {
    validate(s);
    if (!seen.insert(s.id).second) throw ValidationError("duplicate segment id '" + s.id + "'");
  }
}

void check_no_leakage(const ExemplarSet& exemplars, const std::vector<Segment>& testset) {
  std::set<std::string> sources;
  for (const auto& s : testset) sources.insert(normalize_whitespace(s.source_text));
  for (const auto& e : exemplars.items) {
    if (sources.count(normalize_whitespace(e.source)))
      throw ExemplarLeakage("exemplar source also appears in the test set: " + e.source);
  }
}

void validate_drafts(const TranslationDraft& initial, const std::vector<TranslationDraft>& refined) {
  if (initial.stage != DraftStage::initial || initial.iteration != 0)
    throw ValidationError("first draft of segment " + initial.segment_id + " is not the initial draft");
  int expected = 1;
  for (const auto& d : refined) {
    if (d.stage != DraftStage::refined) throw ValidationError("duplicate initial draft for " + initial.segment_id);
    if (d.iteration != expected)
      throw ValidationError("refinement iterations of " + initial.segment_id + " are not consecutive from 1");
    ++expected;
  }
}

std::string to_string(RefineVariant v) { return v == RefineVariant::alpha ? "alpha" : "beta"; }

RefineVariant parse_refine_variant(std::string_view s) {
  if (s == "alpha") return RefineVariant::alpha;
  if (s == "beta") return RefineVariant::beta;
  throw ConfigError("refine_variant must be alpha or beta, got '" + std::string(s) + "'");
}

RunConfig validate_run_config(const RunConfig& config) {
  if (config.translate_model.empty()) throw ConfigError("translate_model is empty");
  if (config.estimate_model.empty()) throw ConfigError("estimate_model is empty");
  if (config.refine_model.empty()) throw ConfigError("refine_model is empty");
  if (config.translate_shots != 0 && config.translate_shots != 5)
    throw ConfigError("translate_shots must be 0 or 5");
  if (config.estimate_shots != 0 && config.estimate_shots != 3)
    throw ConfigError("estimate_shots must be 0 or 3");
  if (config.refine_variant == RefineVariant::beta && config.translate_shots != 5)
    throw ConfigError("refine_variant beta requires translate_shots = 5");
  if (config.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (config.decoding.temperature < 0.0) throw ConfigError("decoding.temperature must be >= 0");
  if (config.decoding.max_tokens < 1) throw ConfigError("decoding.max_tokens must be positive");
  return config;
}

namespace {
bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
}  // namespace

std::string trim(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && is_space(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char ch : text) {
    if (is_space(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(ch);
  }
  return out;
}

}  // namespace tear
