#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tear/core.hpp"
#include "tear/mqm.hpp"

namespace tear {

struct TestSet {
  std::string name;
  LanguagePair pair;
  std::vector<Segment> segments;
  std::string provenance;

  friend bool operator==(const TestSet&, const TestSet&) = default;
};

enum class TestSetFormat { tsv, parallel_text };

// tsv: header row naming columns id, source, and optionally reference, doc_id.
TestSet parse_testset_tsv(std::string_view text, const LanguagePair& pair, std::string name = "testset");
TestSet load_testset(const std::filesystem::path& path, const LanguagePair& pair);
// Parallel text: one source per line; references (optional) aligned by line.
// Ids are 1-based line numbers.
TestSet load_parallel_text(const std::filesystem::path& source_path, const std::filesystem::path& reference_path,
                           const LanguagePair& pair);
TestSet load_parallel_text(const std::filesystem::path& source_path, const LanguagePair& pair);

std::string testset_to_tsv(const TestSet& ts);
void save_testset(const TestSet& ts, const std::filesystem::path& path);

// Uniform sample without replacement; survivors keep their original order.
// SampleTooLarge when n exceeds the set size.
TestSet sample_testset(const TestSet& ts, std::size_t n, std::int64_t seed);

// Human MQM rows, columns system, segment_id, severity, category, span (optional).
std::vector<MqmRow> parse_mqm_dump(std::string_view text);
std::vector<MqmRow> load_mqm_dump(const std::filesystem::path& path);

}  // namespace tear
