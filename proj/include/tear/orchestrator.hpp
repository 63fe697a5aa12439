#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tear/core.hpp"
#include "tear/gateway.hpp"
#include "tear/mqm.hpp"
#include "tear/prompts.hpp"

namespace tear {

enum class Outcome { not_flagged, flagged_modified, flagged_unmodified };
std::string to_string(Outcome o);
Outcome parse_outcome(std::string_view s);

struct TearRecord {
  std::string segment_id;
  TranslationDraft initial;
  std::vector<EstimationResult> estimations;
  std::vector<TranslationDraft> refined;
  Outcome outcome = Outcome::not_flagged;
  std::string final_text;
  // "tear", "it_only", "scot" or "contrastive".
  std::string strategy = "tear";
  // Gateway or prompt failures, in the order they happened.
  std::vector<std::string> errors;
};

struct ExperimentSummary {
  std::size_t segments = 0;
  std::size_t cn = 0;  // flagged for correction
  std::size_t cm = 0;  // flagged and modified
  std::size_t cu = 0;  // flagged and unchanged
  double execution_rate = 0.0;
  std::size_t failed = 0;  // records carrying at least one error

  friend bool operator==(const ExperimentSummary&, const ExperimentSummary&) = default;
};

ExperimentSummary summarize(const std::vector<TearRecord>& records);

struct ExperimentResult {
  std::vector<TearRecord> records;
  ExperimentSummary summary;
};

// Removes a leading "Target:"/"Translation:" label and surrounding whitespace.
std::string clean_translation_output(std::string_view raw);
// Text after the last "Final translation:" label, or the whole cleaned text.
std::string extract_scot_final(std::string_view raw);

class Orchestrator {
 public:
  explicit Orchestrator(Gateway& gateway, const TemplateStore& templates = TemplateStore::builtin(),
                        const Taxonomy& taxonomy = Taxonomy::builtin());

  // Translate, then up to config.max_iterations rounds of Estimate -> Refine.
  TearRecord run_tear(const Segment& segment, const RunConfig& config,
                      const std::optional<ExemplarSet>& exemplars) const;
  TearRecord run_baseline(BaselineKind kind, const Segment& segment, const RunConfig& config,
                          const std::optional<ExemplarSet>& exemplars) const;

  // Segments run concurrently (up to `parallelism`); records keep input order.
  ExperimentResult run_experiment(const std::vector<Segment>& testset, const RunConfig& config,
                                  const std::optional<ExemplarSet>& exemplars, std::size_t parallelism = 1,
                                  std::optional<BaselineKind> baseline = std::nullopt) const;

 private:
  std::optional<TranslationDraft> translate(const Segment& segment, const RunConfig& config,
                                            const std::optional<ExemplarSet>& exemplars, TearRecord& record) const;

  Gateway& gateway_;
  const TemplateStore& templates_;
  const Taxonomy& taxonomy_;
};

}  // namespace tear
