#include "tear/json_io.hpp"

#include "tear/errors.hpp"

namespace tear {

namespace {

template <typename T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
void get_opt(const json& j, const char* key, std::optional<T>& v) {
  if (j.contains(key) && !j[key].is_null()) v = j[key].get<T>();
  else v.reset();
}

std::string stage_name(DraftStage s) { return s == DraftStage::initial ? "initial" : "refined"; }

DraftStage parse_stage(const std::string& s) {
  if (s == "initial") return DraftStage::initial;
  if (s == "refined") return DraftStage::refined;
  throw ValidationError("unknown draft stage '" + s + "'");
}

}  // namespace

void to_json(json& j, const LanguagePair& p) { j = json{{"source_lang", p.source_lang}, {"target_lang", p.target_lang}}; }
void from_json(const json& j, LanguagePair& p) {
  p.source_lang = j.at("source_lang").get<std::string>();
  p.target_lang = j.at("target_lang").get<std::string>();
}

void to_json(json& j, const Segment& s) {
  j = json{{"id", s.id}, {"pair", s.pair}, {"source_text", s.source_text}};
  put_opt(j, "reference_text", s.reference_text);
  put_opt(j, "doc_id", s.doc_id);
}
void from_json(const json& j, Segment& s) {
  s.id = j.at("id").get<std::string>();
  s.pair = j.at("pair").get<LanguagePair>();
  s.source_text = j.at("source_text").get<std::string>();
  get_opt(j, "reference_text", s.reference_text);
  get_opt(j, "doc_id", s.doc_id);
}

void to_json(json& j, const Exemplar& e) { j = json{{"source", e.source}, {"target", e.target}}; }
void from_json(const json& j, Exemplar& e) {
  e.source = j.at("source").get<std::string>();
  e.target = j.at("target").get<std::string>();
}

void to_json(json& j, const ExemplarSet& e) { j = json{{"pair", e.pair}, {"items", e.items}}; }
void from_json(const json& j, ExemplarSet& e) {
  e.pair = j.at("pair").get<LanguagePair>();
  e.items = j.at("items").get<std::vector<Exemplar>>();
}

void to_json(json& j, const TranslationDraft& d) {
  j = json{{"segment_id", d.segment_id},         {"text", d.text},
           {"stage", stage_name(d.stage)},       {"iteration", d.iteration},
           {"producer_model", d.producer_model}, {"prompt_kind", d.prompt_kind}};
}
void from_json(const json& j, TranslationDraft& d) {
  d.segment_id = j.at("segment_id").get<std::string>();
  d.text = j.at("text").get<std::string>();
  d.stage = parse_stage(j.at("stage").get<std::string>());
  d.iteration = j.at("iteration").get<int>();
  d.producer_model = j.at("producer_model").get<std::string>();
  d.prompt_kind = j.at("prompt_kind").get<std::string>();
}

void to_json(json& j, const Decoding& d) { j = json{{"temperature", d.temperature}, {"max_tokens", d.max_tokens}}; }
void from_json(const json& j, Decoding& d) {
  d.temperature = j.at("temperature").get<double>();
  d.max_tokens = j.at("max_tokens").get<int>();
}

void to_json(json& j, const RunConfig& c) {
  j = json{{"translate_model", c.translate_model},
           {"estimate_model", c.estimate_model},
           {"refine_model", c.refine_model},
           {"translate_shots", c.translate_shots},
           {"estimate_shots", c.estimate_shots},
           {"refine_variant", to_string(c.refine_variant)},
           {"max_iterations", c.max_iterations},
           {"force_iterations", c.force_iterations},
           {"sample_seed", c.sample_seed},
           {"decoding", c.decoding}};
}
void from_json(const json& j, RunConfig& c) {
  RunConfig d;
  c.translate_model = j.value("translate_model", d.translate_model);
  c.estimate_model = j.value("estimate_model", d.estimate_model);
  c.refine_model = j.value("refine_model", d.refine_model);
  c.translate_shots = j.value("translate_shots", d.translate_shots);
  c.estimate_shots = j.value("estimate_shots", d.estimate_shots);
  c.refine_variant = parse_refine_variant(j.value("refine_variant", to_string(d.refine_variant)));
  c.max_iterations = j.value("max_iterations", d.max_iterations);
  c.force_iterations = j.value("force_iterations", d.force_iterations);
  c.sample_seed = j.value("sample_seed", d.sample_seed);
  c.decoding = j.contains("decoding") ? j["decoding"].get<Decoding>() : d.decoding;
}

void to_json(json& j, const ErrorCategory& c) {
  j = json{{"top", c.top}};
  put_opt(j, "sub", c.sub);
  put_opt(j, "raw_label", c.raw_label);
}
void from_json(const json& j, ErrorCategory& c) {
  c.top = j.at("top").get<std::string>();
  get_opt(j, "sub", c.sub);
  get_opt(j, "raw_label", c.raw_label);
}

void to_json(json& j, const ErrorAnnotation& a) {
  j = json{{"severity", to_string(a.severity)}, {"category", a.category}};
  put_opt(j, "span", a.span);
}
void from_json(const json& j, ErrorAnnotation& a) {
  auto sev = parse_severity(j.at("severity").get<std::string>());
  if (!sev) throw ValidationError("unknown severity " + j.at("severity").dump());
  a.severity = *sev;
  a.category = j.at("category").get<ErrorCategory>();
  get_opt(j, "span", a.span);
}

void to_json(json& j, const EstimationResult& r) {
  j = json{{"annotations", r.annotations},
           {"needs_refinement", r.needs_refinement},
           {"raw_text", r.raw_text},
           {"parse_warnings", r.parse_warnings}};
}
void from_json(const json& j, EstimationResult& r) {
  r.annotations = j.at("annotations").get<std::vector<ErrorAnnotation>>();
  r.needs_refinement = j.at("needs_refinement").get<bool>();
  r.raw_text = j.at("raw_text").get<std::string>();
  r.parse_warnings = j.at("parse_warnings").get<std::vector<std::string>>();
}

void to_json(json& j, const TearRecord& r) {
  j = json{{"segment_id", r.segment_id}, {"initial", r.initial},         {"estimations", r.estimations},
           {"refined", r.refined},       {"outcome", to_string(r.outcome)}, {"final_text", r.final_text},
           {"strategy", r.strategy},     {"errors", r.errors}};
}
void from_json(const json& j, TearRecord& r) {
  r.segment_id = j.at("segment_id").get<std::string>();
  r.initial = j.at("initial").get<TranslationDraft>();
  r.estimations = j.at("estimations").get<std::vector<EstimationResult>>();
  r.refined = j.at("refined").get<std::vector<TranslationDraft>>();
  r.outcome = parse_outcome(j.at("outcome").get<std::string>());
  r.final_text = j.at("final_text").get<std::string>();
  r.strategy = j.value("strategy", "tear");
  r.errors = j.value("errors", std::vector<std::string>{});
}

void to_json(json& j, const ExperimentSummary& s) {
  j = json{{"segments", s.segments}, {"CN", s.cn},         {"CM", s.cm},
           {"CU", s.cu},             {"execution_rate", s.execution_rate}, {"failed", s.failed}};
}
void from_json(const json& j, ExperimentSummary& s) {
  s.segments = j.at("segments").get<std::size_t>();
  s.cn = j.at("CN").get<std::size_t>();
  s.cm = j.at("CM").get<std::size_t>();
  s.cu = j.at("CU").get<std::size_t>();
  s.execution_rate = j.at("execution_rate").get<double>();
  s.failed = j.value("failed", std::size_t{0});
}

void to_json(json& j, const PreferenceJudgment& p) {
  j = json{{"pair_id", p.pair_id}, {"choice", to_string(p.choice)}, {"annotator_id", p.annotator_id},
           {"timestamp", p.timestamp}};
}
void from_json(const json& j, PreferenceJudgment& p) {
  p.pair_id = j.at("pair_id").get<std::string>();
  p.choice = parse_choice(j.at("choice").get<std::string>());
  p.annotator_id = j.at("annotator_id").get<std::string>();
  p.timestamp = j.value("timestamp", "");
}

}  // namespace tear
