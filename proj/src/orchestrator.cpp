#include "tear/orchestrator.hpp"

#include <atomic>
#include <thread>

#include "tear/errors.hpp"
#include "tear/util.hpp"

namespace tear {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::not_flagged: return "not_flagged";
    case Outcome::flagged_modified: return "flagged_modified";
    case Outcome::flagged_unmodified: return "flagged_unmodified";
  }
  return "not_flagged";
}

Outcome parse_outcome(std::string_view s) {
  if (s == "not_flagged") return Outcome::not_flagged;
  if (s == "flagged_modified") return Outcome::flagged_modified;
  if (s == "flagged_unmodified") return Outcome::flagged_unmodified;
  throw ValidationError("unknown outcome '" + std::string(s) + "'");
}

ExperimentSummary summarize(const std::vector<TearRecord>& records) {
  ExperimentSummary s;
  s.segments = records.size();
  for (const auto& r : records) {
    if (r.outcome == Outcome::flagged_modified) ++s.cm;
    if (r.outcome == Outcome::flagged_unmodified) ++s.cu;
    if (!r.errors.empty()) ++s.failed;
  }
  s.cn = s.cm + s.cu;
  s.execution_rate = s.cn == 0 ? 0.0 : static_cast<double>(s.cm) / static_cast<double>(s.cn);
  return s;
}

namespace {

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && to_lower_ascii(s.substr(0, prefix.size())) == prefix;
}

std::string describe(const std::exception& e) { return e.what(); }

void enforce_exemplars(const RunConfig& config, const std::optional<ExemplarSet>& exemplars) {
  if (config.translate_shots == static_cast<int>(kTranslateShots) && !exemplars)
    throw MissingExemplars("translate_shots=5 needs an exemplar set");
}

}  // namespace

std::string clean_translation_output(std::string_view raw) {
  std::string s = trim(raw);
  for (std::string_view label : {"target:", "translation:"}) {
    if (starts_with_ci(s, label)) {
      s = trim(std::string_view(s).substr(label.size()));
      break;
    }
  }
  return s;
}

std::string extract_scot_final(std::string_view raw) {
  const std::string lower = to_lower_ascii(raw);
  constexpr std::string_view label = "final translation:";
  auto pos = lower.rfind(label);
  if (pos == std::string::npos) return clean_translation_output(raw);
  return clean_translation_output(raw.substr(pos + label.size()));
}

Orchestrator::Orchestrator(Gateway& gateway, const TemplateStore& templates, const Taxonomy& taxonomy)
    : gateway_(gateway), templates_(templates), taxonomy_(taxonomy) {}

std::optional<TranslationDraft> Orchestrator::translate(const Segment& segment, const RunConfig& config,
                                                        const std::optional<ExemplarSet>& exemplars,
                                                        TearRecord& record) const {
  record.segment_id = segment.id;
  record.initial.segment_id = segment.id;
  record.initial.stage = DraftStage::initial;
  record.initial.iteration = 0;
  record.initial.producer_model = config.translate_model;
  try {
    const bool few = config.translate_shots == static_cast<int>(kTranslateShots);
    auto prompt = build_translate_prompt(segment, few ? exemplars : std::nullopt, templates_);
    record.initial.prompt_kind = to_string(prompt.kind);
    auto resp = gateway_.complete({config.translate_model, prompt.text, config.decoding, "translate"});
    record.initial.text = clean_translation_output(resp.text);
    record.final_text = record.initial.text;
    return record.initial;
  } catch (const std::exception& e) {
    record.errors.push_back("translate: " + describe(e));
    return std::nullopt;
  }
}

TearRecord Orchestrator::run_tear(const Segment& segment, const RunConfig& config,
                                  const std::optional<ExemplarSet>& exemplars) const {
  validate_run_config(config);
  enforce_exemplars(config, exemplars);
  TearRecord record;
  record.strategy = "tear";
  if (!translate(segment, config, exemplars, record)) return record;

  const LanguagePair& pair = segment.pair;
  const RefineVariant variant = config.refine_variant;
  std::string current = record.initial.text;
  bool flagged = false;
  for (int it = 1; it <= config.max_iterations; ++it) {
    EstimationResult est;
    try {
      auto prompt = build_estimate_prompt(segment.source_text, current, pair, config.estimate_shots, templates_);
      auto resp = gateway_.complete({config.estimate_model, prompt.text, config.decoding, "estimate"});
      est = parse_estimation(resp.text, taxonomy_);
    } catch (const std::exception& e) {
      record.errors.push_back("estimate: " + describe(e));
      break;
    }
    const bool needs = est.needs_refinement;
    const std::string feedback = serialize_feedback(est);
    record.estimations.push_back(std::move(est));
    if (it == 1) flagged = needs;
    if (!flagged) break;
    if (!needs && !config.force_iterations) break;

    try {
      auto prompt = build_refine_prompt(variant, segment.source_text, current, feedback, pair,
                                        variant == RefineVariant::beta ? exemplars : std::nullopt, templates_);
      auto resp = gateway_.complete({config.refine_model, prompt.text, config.decoding, "refine"});
      TranslationDraft draft;
      draft.segment_id = segment.id;
      draft.text = clean_translation_output(resp.text);
      draft.stage = DraftStage::refined;
      draft.iteration = it;
      draft.producer_model = config.refine_model;
      draft.prompt_kind = to_string(prompt.kind);
      current = draft.text;
      record.refined.push_back(std::move(draft));
    } catch (const std::exception& e) {
      record.errors.push_back("refine: " + describe(e));
      break;
    }
  }

  if (!flagged) {
    record.outcome = Outcome::not_flagged;
    record.final_text = record.initial.text;
    return record;
  }
  // A failed refine leaves the last successful draft in place.
  record.final_text = record.refined.empty() ? record.initial.text : record.refined.back().text;
  record.outcome = normalize_whitespace(record.final_text) == normalize_whitespace(record.initial.text)
                       ? Outcome::flagged_unmodified
                       : Outcome::flagged_modified;
  return record;
}

TearRecord Orchestrator::run_baseline(BaselineKind kind, const Segment& segment, const RunConfig& config,
                                      const std::optional<ExemplarSet>& exemplars) const {
  validate_run_config(config);
  enforce_exemplars(config, exemplars);
  TearRecord record;
  record.strategy = to_string(kind);
  if (!translate(segment, config, exemplars, record)) return record;
  record.outcome = Outcome::not_flagged;
  if (kind == BaselineKind::it_only) return record;

  try {
    auto prompt = build_baseline_prompt(kind, segment.source_text, record.initial.text, segment.pair, templates_);
    auto resp = gateway_.complete({config.refine_model, prompt.text, config.decoding, "baseline"});
    TranslationDraft draft;
    draft.segment_id = segment.id;
    draft.text = kind == BaselineKind::scot ? extract_scot_final(resp.text) : clean_translation_output(resp.text);
    draft.stage = DraftStage::refined;
    draft.iteration = 1;
    draft.producer_model = config.refine_model;
    draft.prompt_kind = to_string(prompt.kind);
    record.refined.push_back(std::move(draft));
  } catch (const std::exception& e) {
    record.errors.push_back("baseline: " + describe(e));
  }
  // Baselines rewrite every segment; there is no gate.
  record.final_text = record.refined.empty() ? record.initial.text : record.refined.back().text;
  record.outcome = normalize_whitespace(record.final_text) == normalize_whitespace(record.initial.text)
                       ? Outcome::flagged_unmodified
                       : Outcome::flagged_modified;
  return record;
}

ExperimentResult Orchestrator::run_experiment(const std::vector<Segment>& testset, const RunConfig& config,
                                              const std::optional<ExemplarSet>& exemplars, std::size_t parallelism,
                                              std::optional<BaselineKind> baseline) const {
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  validate_run_config(config);
  enforce_exemplars(config, exemplars);
  if (config.refine_variant == RefineVariant::beta && !baseline && !exemplars)
    throw MissingExemplars("refine_beta needs an exemplar set");

  ExperimentResult result;
  result.records.resize(testset.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= testset.size()) return;
      TearRecord& rec = result.records[i];
      try {
        rec = baseline ? run_baseline(*baseline, testset[i], config, exemplars)
                       : run_tear(testset[i], config, exemplars);
      } catch (const std::exception& e) {
        rec = TearRecord{};
        rec.segment_id = testset[i].id;
        rec.strategy = baseline ? to_string(*baseline) : "tear";
        rec.errors.push_back(describe(e));
      }
    }
  };
  const std::size_t n = std::min(parallelism, std::max<std::size_t>(1, testset.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  result.summary = summarize(result.records);
  return result;
}

}  // namespace tear
