#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tear/corpus.hpp"
#include "tear/json_io.hpp"
#include "tear/orchestrator.hpp"

namespace tear {

inline constexpr int kArchiveFormatVersion = 1;

struct ArchiveManifest {
  int format_version = kArchiveFormatVersion;
  std::string tool_version;
  RunConfig config;
  std::string strategy = "tear";  // tear | it_only | scot | contrastive
  std::string label;              // row name in reports, e.g. "TEaR (few-shot estimate)"
  LanguagePair pair;
  std::map<std::string, std::string> paths;  // testset, exemplars, cache, ...
};

// Per-segment metric values on each metric's native scale, keyed by metric
// name ("bleu", "comet22", "cometkiwi", "bleurt20").
struct SegmentScores {
  std::map<std::string, double> initial;
  std::map<std::string, double> final;
};

struct RunArchive {
  ArchiveManifest manifest;
  std::vector<Segment> segments;
  std::vector<TearRecord> records;            // same order as segments
  std::map<std::string, SegmentScores> scores;  // by segment id
  ExperimentSummary summary;
  std::map<std::string, double> corpus_initial;  // corpus-level score per metric
  std::map<std::string, double> corpus_final;
  std::optional<json> meta_eval;
  std::optional<json> preference;
};

// Directory layout: manifest.json, records.jsonl, scores.jsonl, summary.json,
// optional meta_eval.json / preference.json, and `digest` (sha256 over the rest).
void save_run(const RunArchive& archive, const std::filesystem::path& dir);
// VersionError for a newer format; CorruptArchive for digest mismatch,
// missing files or unparseable content.
RunArchive load_run(const std::filesystem::path& dir);

// Writes only manifest.json, before a run starts. The archive stays
// unloadable (no digest) until save_run completes.
void save_manifest(const ArchiveManifest& manifest, const std::filesystem::path& dir);

// The archive files as name -> bytes, exactly as save_run writes them.
std::map<std::string, std::string> archive_files(const RunArchive& archive);

}  // namespace tear
