#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tear/archive.hpp"
#include "tear/bridge.hpp"
#include "tear/corpus.hpp"
#include "tear/orchestrator.hpp"
#include "tear/stats.hpp"

namespace tear {

struct RunOptions {
  RunConfig config;
  std::string strategy = "tear";  // tear | it_only | scot | contrastive
  std::string label;
  std::size_t parallelism = 1;
  // Exemplar pool; the bundled pool for the pair when empty.
  std::vector<Exemplar> exemplar_pool;
  std::map<std::string, std::string> paths;
};

// The exemplar set a run uses, or nullopt when no prompt needs one.
std::optional<ExemplarSet> exemplars_for(const RunOptions& options, const TestSet& testset);

ArchiveManifest make_manifest(const RunOptions& options, const TestSet& testset);

// Translate (and for "tear", Estimate/Refine) every segment; no scores yet.
RunArchive execute_run(Gateway& gateway, const TestSet& testset, const RunOptions& options,
                       const TemplateStore& templates = TemplateStore::builtin());

// Sentence BLEU (exp smoothing) per segment and corpus BLEU (no smoothing) for
// the initial and final translations. Segments without a reference are skipped;
// corpus BLEU is left out unless every segment has one.
void score_bleu(RunArchive& archive);

// Neural metrics through the bridge; corpus value = mean of segment scores.
// Reference-based metrics are skipped when a reference is missing.
void score_neural(RunArchive& archive, ScorerBridge& bridge, const std::vector<NeuralMetric>& metrics);

// One language pair of a meta-evaluation: system-level pairwise accuracy
// plus segment-level Kendall (all variants, null when undefined).
json meta_evaluate(const SystemEvalTable::Cells& metric, const SystemEvalTable::Cells& human,
                   const std::string& pair_tag, KendallGrouping grouping = KendallGrouping::global);

// (system, segment_id, score) rows with a header.
SystemEvalTable::Cells parse_metric_scores_tsv(std::string_view text);
// Human MQM cells from loaded scores.
SystemEvalTable::Cells human_cells(const HumanMqmScores& scores);

}  // namespace tear
