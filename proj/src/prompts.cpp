#include "tear/prompts.hpp"

#include <algorithm>
#include <cctype>

#include "tear/embedded.hpp"
#include "tear/errors.hpp"
#include "tear/util.hpp"

namespace tear {

namespace {

constexpr std::pair<PromptKind, std::string_view> kKindNames[] = {
    {PromptKind::translate_zero, "translate_zero"},
    {PromptKind::translate_few, "translate_few"},
    {PromptKind::estimate_zero, "estimate_zero"},
    {PromptKind::estimate_few, "estimate_few"},
    {PromptKind::refine_alpha, "refine_alpha"},
    {PromptKind::refine_beta, "refine_beta"},
    {PromptKind::scot_baseline, "scot_baseline"},
    {PromptKind::contrastive_baseline, "contrastive_baseline"},
};

bool is_placeholder_char(char c) { return std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '_'; }

void require_text(std::string_view value, std::string_view what) {
  if (trim(value).empty()) throw PlaceholderError(std::string(what) + " is empty");
}

void add_exemplars(std::map<std::string, std::string>& values, const ExemplarSet& exemplars) {
  for (std::size_t i = 0; i < exemplars.items.size(); ++i) {
    values["src_example_" + std::to_string(i + 1)] = exemplars.items[i].source;
    values["tgt_example_" + std::to_string(i + 1)] = exemplars.items[i].target;
  }
}

void check_exemplar_count(const ExemplarSet& exemplars) {
  if (exemplars.items.size() != kTranslateShots)
    throw PlaceholderError("few-shot prompts need exactly " + std::to_string(kTranslateShots) + " exemplars, got " +
                           std::to_string(exemplars.items.size()));
}

}  // namespace

std::string to_string(PromptKind kind) {
  for (auto [k, name] : kKindNames)
    if (k == kind) return std::string(name);
  return "unknown";
}

PromptKind parse_prompt_kind(std::string_view name) {
  for (auto [k, n] : kKindNames)
    if (n == name) return k;
  throw ConfigError("unknown prompt kind '" + std::string(name) + "'");
}

const std::vector<std::string>& known_placeholders() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v = {"src_lan", "tgt_lan", "origin", "init_trans", "raw_src", "raw_mt", "estimate_fdb"};
    for (int i = 1; i <= static_cast<int>(kTranslateShots); ++i) {
      v.push_back("src_example_" + std::to_string(i));
      v.push_back("tgt_example_" + std::to_string(i));
    }
    return v;
  }();
  return names;
}

const TemplateStore& TemplateStore::builtin() {
  static const TemplateStore store = [] {
    TemplateStore s;
    for (auto [kind, name] : kKindNames) {
      auto data = embedded::find("templates/" + std::string(name) + ".txt");
      if (!data) throw TemplateError("built-in template missing: " + std::string(name));
      s.texts_[kind] = std::string(*data);
    }
    return s;
  }();
  return store;
}

TemplateStore TemplateStore::load(const std::filesystem::path& dir) {
  TemplateStore s;
  for (auto [kind, name] : kKindNames) {
    auto path = dir / (std::string(name) + ".txt");
    if (!std::filesystem::exists(path)) throw TemplateError("template file missing: " + path.string());
    std::string text = read_file(path);
    if (auto bad = find_invalid_utf8(text)) throw EncodingError(*bad, path.string() + " is not UTF-8");
    s.texts_[kind] = std::move(text);
  }
  return s;
}

const std::string& TemplateStore::get(PromptKind kind) const {
  auto it = texts_.find(kind);
  if (it == texts_.end()) throw TemplateError("no template for " + to_string(kind));
  return it->second;
}

RenderedPrompt render_template(PromptKind kind, std::string_view tmpl,
                               const std::map<std::string, std::string>& values) {
  const auto& known = known_placeholders();
  RenderedPrompt out;
  out.kind = kind;
  out.text.reserve(tmpl.size() + 256);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t j = i + 1;
      while (j < tmpl.size() && is_placeholder_char(tmpl[j])) ++j;
      if (j < tmpl.size() && tmpl[j] == '}' && j > i + 1) {
        std::string name(tmpl.substr(i + 1, j - i - 1));
        if (std::find(known.begin(), known.end(), name) != known.end()) {
          auto it = values.find(name);
          if (it == values.end()) throw PlaceholderError("no value for {" + name + "} in " + to_string(kind));
          out.text += it->second;
          out.placeholders_filled[name] = it->second;
          i = j + 1;
          continue;
        }
      }
    }
    out.text.push_back(tmpl[i]);
    ++i;
  }
  return out;
}

ExemplarSet select_exemplars(const std::vector<Exemplar>& pool, const LanguagePair& pair, std::size_t k,
                             std::int64_t seed) {
  if (pool.size() < k)
    throw InsufficientPool("pool has " + std::to_string(pool.size()) + " exemplars, need " + std::to_string(k));
  ExemplarSet set;
  set.pair = pair;
  for (auto idx : sample_indices(pool.size(), k, derive_seed(seed, "exemplars:" + pair.tag())))
    set.items.push_back(pool[idx]);
  return set;
}

std::vector<Exemplar> parse_exemplar_pool(std::string_view tsv) {
  std::vector<Exemplar> pool;
  auto lines = split(tsv, '\n');
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string line = lines[n];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (n == 0 && cols.size() >= 2 && cols[0] == "source" && cols[1] == "target") continue;
    if (cols.size() != 2) throw FormatError(n + 1, "exemplar rows need exactly 2 columns");
    if (trim(cols[0]).empty() || trim(cols[1]).empty()) throw FormatError(n + 1, "empty exemplar field");
    pool.push_back({cols[0], cols[1]});
  }
  return pool;
}

std::vector<Exemplar> load_exemplar_pool(const std::filesystem::path& path) {
  std::string text = read_file(path);
  if (auto bad = find_invalid_utf8(text)) throw EncodingError(*bad, path.string() + " is not UTF-8");
  return parse_exemplar_pool(text);
}

std::vector<Exemplar> builtin_exemplar_pool(const LanguagePair& pair) {
  auto data = embedded::find("exemplars/" + pair.tag() + ".tsv");
  if (!data) return {};
  return parse_exemplar_pool(*data);
}

RenderedPrompt build_translate_prompt(const Segment& segment, const std::optional<ExemplarSet>& exemplars,
                                      const TemplateStore& store) {
  try {
    validate(segment);
  } catch (const ValidationError& e) {
    throw PlaceholderError(e.what());
  }
  std::map<std::string, std::string> values = {
      {"src_lan", segment.pair.source_name()},
      {"tgt_lan", segment.pair.target_name()},
      {"origin", segment.source_text},
  };
  PromptKind kind = PromptKind::translate_zero;
  if (exemplars) {
    check_exemplar_count(*exemplars);
    add_exemplars(values, *exemplars);
    kind = PromptKind::translate_few;
  }
  return render_template(kind, store.get(kind), values);
}

RenderedPrompt build_estimate_prompt(std::string_view source, std::string_view translation,
                                     const LanguagePair& pair, int shots, const TemplateStore& store) {
  require_text(source, "source");
  require_text(translation, "translation");
  validate(pair);
  PromptKind kind;
  if (shots == 0) {
    kind = PromptKind::estimate_zero;
  } else if (shots == static_cast<int>(kEstimateShots)) {
    kind = PromptKind::estimate_few;
  } else {
    throw ConfigError("estimate shots must be 0 or 3");
  }
  return render_template(kind, store.get(kind),
                         {{"src_lan", pair.source_name()},
                          {"tgt_lan", pair.target_name()},
                          {"origin", std::string(source)},
                          {"init_trans", std::string(translation)}});
}

RenderedPrompt build_refine_prompt(RefineVariant variant, std::string_view source, std::string_view initial,
                                   std::string_view feedback, const LanguagePair& pair,
                                   const std::optional<ExemplarSet>& exemplars, const TemplateStore& store) {
  require_text(source, "source");
  require_text(initial, "initial translation");
  require_text(feedback, "estimation feedback");
  validate(pair);
  std::map<std::string, std::string> values = {
      {"src_lan", pair.source_name()},    {"tgt_lan", pair.target_name()},
      {"raw_src", std::string(source)},   {"raw_mt", std::string(initial)},
      {"estimate_fdb", std::string(feedback)},
  };
  PromptKind kind = PromptKind::refine_alpha;
  if (variant == RefineVariant::beta) {
    if (!exemplars) throw MissingExemplars("refine_beta needs the translation exemplars");
    check_exemplar_count(*exemplars);
    add_exemplars(values, *exemplars);
    kind = PromptKind::refine_beta;
  }
  return render_template(kind, store.get(kind), values);
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::it_only: return "it_only";
    case BaselineKind::scot: return "scot";
    case BaselineKind::contrastive: return "contrastive";
  }
  return "unknown";
}

BaselineKind parse_baseline_kind(std::string_view name) {
  if (name == "it_only" || name == "it") return BaselineKind::it_only;
  if (name == "scot") return BaselineKind::scot;
  if (name == "contrastive" || name == "ct") return BaselineKind::contrastive;
  throw ConfigError("unknown baseline '" + std::string(name) + "' (it_only, scot, contrastive)");
}

RenderedPrompt build_baseline_prompt(BaselineKind kind, std::string_view source, std::string_view initial,
                                     const LanguagePair& pair, const TemplateStore& store) {
  require_text(source, "source");
  require_text(initial, "initial translation");
  validate(pair);
  PromptKind pk;
  switch (kind) {
    case BaselineKind::scot: pk = PromptKind::scot_baseline; break;
    case BaselineKind::contrastive: pk = PromptKind::contrastive_baseline; break;
    default: throw ConfigError("it_only has no rewrite prompt");
  }
  return render_template(pk, store.get(pk),
                         {{"src_lan", pair.source_name()},
                          {"tgt_lan", pair.target_name()},
                          {"raw_src", std::string(source)},
                          {"raw_mt", std::string(initial)}});
}

}  // namespace tear
