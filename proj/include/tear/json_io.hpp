#pragma once

// JSON encodings of the domain types, used by run archives, the CLI and the
// Python bindings. Every from_json(to_json(x)) is the identity.

#include <json.hpp>

#include "tear/analysis.hpp"
#include "tear/core.hpp"
#include "tear/mqm.hpp"
#include "tear/orchestrator.hpp"

namespace tear {

using nlohmann::json;

void to_json(json& j, const LanguagePair& p);
void from_json(const json& j, LanguagePair& p);
void to_json(json& j, const Segment& s);
void from_json(const json& j, Segment& s);
void to_json(json& j, const Exemplar& e);
void from_json(const json& j, Exemplar& e);
void to_json(json& j, const ExemplarSet& e);
void from_json(const json& j, ExemplarSet& e);
void to_json(json& j, const TranslationDraft& d);
void from_json(const json& j, TranslationDraft& d);
void to_json(json& j, const Decoding& d);
void from_json(const json& j, Decoding& d);
void to_json(json& j, const RunConfig& c);
void from_json(const json& j, RunConfig& c);

void to_json(json& j, const ErrorCategory& c);
void from_json(const json& j, ErrorCategory& c);
void to_json(json& j, const ErrorAnnotation& a);
void from_json(const json& j, ErrorAnnotation& a);
void to_json(json& j, const EstimationResult& r);
void from_json(const json& j, EstimationResult& r);

void to_json(json& j, const TearRecord& r);
void from_json(const json& j, TearRecord& r);
void to_json(json& j, const ExperimentSummary& s);
void from_json(const json& j, ExperimentSummary& s);

void to_json(json& j, const PreferenceJudgment& p);
void from_json(const json& j, PreferenceJudgment& p);

}  // namespace tear
