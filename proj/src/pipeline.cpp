#include "tear/pipeline.hpp"

#include <cmath>

#include "tear/bleu.hpp"
#include "tear/errors.hpp"
#include "tear/util.hpp"

#ifndef TEAR_VERSION
#define TEAR_VERSION "0.0.0"
#endif

namespace tear {

namespace {

std::optional<BaselineKind> baseline_of(const std::string& strategy) {
  if (strategy == "tear") return std::nullopt;
  if (strategy == "it_only" || strategy == "it") return BaselineKind::it_only;
  if (strategy == "scot") return BaselineKind::scot;
  if (strategy == "contrastive" || strategy == "ct") return BaselineKind::contrastive;
  throw ConfigError("unknown strategy '" + strategy + "'");
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

std::optional<ExemplarSet> exemplars_for(const RunOptions& options, const TestSet& testset) {
  const bool beta = options.strategy == "tear" && options.config.refine_variant == RefineVariant::beta;
  if (options.config.translate_shots == 0 && !beta) return std::nullopt;
  const auto pool = options.exemplar_pool.empty() ? builtin_exemplar_pool(testset.pair) : options.exemplar_pool;
  ExemplarSet set = select_exemplars(pool, testset.pair, kTranslateShots, options.config.sample_seed);
  check_no_leakage(set, testset.segments);
  return set;
}

ArchiveManifest make_manifest(const RunOptions& options, const TestSet& testset) {
  ArchiveManifest m;
  m.tool_version = TEAR_VERSION;
  m.config = options.config;
  m.strategy = options.strategy == "it" ? "it_only" : options.strategy == "ct" ? "contrastive" : options.strategy;
  m.label = options.label;
  m.pair = testset.pair;
  m.paths = options.paths;
  return m;
}

RunArchive execute_run(Gateway& gateway, const TestSet& testset, const RunOptions& options,
                       const TemplateStore& templates) {
  validate_run_config(options.config);
  validate(testset.segments);
  RunArchive a;
  a.manifest = make_manifest(options, testset);
  a.segments = testset.segments;
  Orchestrator orch(gateway, templates);
  auto result = orch.run_experiment(testset.segments, options.config, exemplars_for(options, testset),
                                    std::max<std::size_t>(1, options.parallelism), baseline_of(options.strategy));
  a.records = std::move(result.records);
  a.summary = result.summary;
  return a;
}

void score_bleu(RunArchive& a) {
  std::vector<std::string> init, fin, refs;
  BleuOptions sentence;
  sentence.smooth = BleuSmooth::exp;
  for (std::size_t i = 0; i < a.records.size() && i < a.segments.size(); ++i) {
    const auto& ref = a.segments[i].reference_text;
    if (!ref) continue;
    const auto& r = a.records[i];
    auto& s = a.scores[r.segment_id];
    s.initial["bleu"] = bleu({r.initial.text}, {*ref}, sentence);
    s.final["bleu"] = bleu({r.final_text}, {*ref}, sentence);
    init.push_back(r.initial.text);
    fin.push_back(r.final_text);
    refs.push_back(*ref);
  }
  if (!refs.empty() && refs.size() == a.records.size()) {
    a.corpus_initial["bleu"] = bleu(init, refs);
    a.corpus_final["bleu"] = bleu(fin, refs);
  }
}

void score_neural(RunArchive& a, ScorerBridge& bridge, const std::vector<NeuralMetric>& metrics) {
  for (auto metric : metrics) {
    const std::string name = to_string(metric);
    std::vector<ScoreItem> items;
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < a.records.size() && i < a.segments.size(); ++i) {
      const auto& seg = a.segments[i];
      if (needs_reference(metric) && !seg.reference_text) continue;
      index.push_back(i);
      const auto ref = needs_reference(metric) ? seg.reference_text : std::nullopt;
      items.push_back({seg.source_text, a.records[i].initial.text, ref});
      items.push_back({seg.source_text, a.records[i].final_text, ref});
    }
    if (items.empty()) continue;
    const auto scores = bridge.score(metric, items);
    std::vector<double> init, fin;
    for (std::size_t k = 0; k < index.size(); ++k) {
      auto& s = a.scores[a.records[index[k]].segment_id];
      s.initial[name] = scores[2 * k];
      s.final[name] = scores[2 * k + 1];
      init.push_back(scores[2 * k]);
      fin.push_back(scores[2 * k + 1]);
    }
    if (index.size() == a.records.size()) {
      a.corpus_initial[name] = mean(init);
      a.corpus_final[name] = mean(fin);
    }
  }
}

json meta_evaluate(const SystemEvalTable::Cells& metric, const SystemEvalTable::Cells& human,
                   const std::string& pair_tag, KendallGrouping grouping) {
  const auto table = SystemEvalTable::align(metric, human);
  json row = {{"pair", pair_tag},
              {"systems", table.systems.size()},
              {"segments", table.segments.size()},
              {"dropped_segments", table.dropped_segments},
              {"grouping", to_string(grouping)}};
  row["pairwise_accuracy"] = pairwise_accuracy(table);
  std::vector<double> defined;
  for (auto v : {KendallVariant::tau_a, KendallVariant::tau_b, KendallVariant::tau_c}) {
    const std::string key = "kendall_" + to_string(v);
    try {
      const double t = segment_kendall(table, v, grouping);
      row[key] = t;
      defined.push_back(t);
    } catch (const DegenerateInput&) {
      row[key] = nullptr;
    }
  }
  row["kendall_average"] = defined.size() == 3 ? json(mean(defined)) : json(nullptr);
  return row;
}

SystemEvalTable::Cells parse_metric_scores_tsv(std::string_view text) {
  auto lines = split(text, '\n');
  if (lines.empty() || trim(lines[0]).empty()) throw FormatError(1, "empty metric score file");
  const auto header = split(trim(lines[0]), '\t');
  if (header.size() < 3 || header[0] != "system" || header[1] != "segment_id" || header[2] != "score")
    throw FormatError(1, "expected header 'system\\tsegment_id\\tscore'");
  SystemEvalTable::Cells cells;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    std::string line = lines[n];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c = split(line, '\t');
    if (c.size() != 3) throw FormatError(n + 1, "expected 3 columns");
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(c[2], &used);
      if (used != c[2].size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw FormatError(n + 1, "score '" + c[2] + "' is not a number");
    }
    if (!cells.emplace(std::make_pair(c[0], c[1]), v).second)
      throw FormatError(n + 1, "duplicate (system, segment) " + c[0] + "/" + c[1]);
  }
  return cells;
}

SystemEvalTable::Cells human_cells(const HumanMqmScores& scores) {
  SystemEvalTable::Cells cells;
  for (const auto& [key, s] : scores.scores) cells[key] = s.value;
  return cells;
}

}  // namespace tear
