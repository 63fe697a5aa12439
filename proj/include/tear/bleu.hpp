#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tear {

enum class BleuTokenize { tok_13a, none };
// add_k adds k to the counts of 2..4-grams; floor replaces zero precisions
// by k/total; exp halves the smoothing term for each successive zero.
enum class BleuSmooth { none, exp, floor, add_k };

struct BleuOptions {
  BleuTokenize tokenize = BleuTokenize::tok_13a;
  BleuSmooth smooth = BleuSmooth::none;
  // Defaults: 0.1 for floor, 1 for add_k.
  std::optional<double> smooth_value;
  bool lowercase = false;
};

struct BleuResult {
  double score = 0.0;  // [0, 100]
  std::array<double, 4> precisions{};
  std::array<double, 4> correct{};
  std::array<double, 4> total{};
  double brevity_penalty = 0.0;
  std::size_t sys_len = 0;
  std::size_t ref_len = 0;

  std::string signature;  // e.g. "nrefs:1|case:mixed|eff:no|tok:13a|smooth:none"
};

// mteval-v13a tokenization, as used by the reference BLEU scorer.
std::vector<std::string> tokenize_13a(std::string_view line);

// Corpus BLEU, one reference per candidate. LengthMismatch / EmptyCorpus.
BleuResult corpus_bleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references,
                       const BleuOptions& options = {});

inline double bleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references,
                   const BleuOptions& options = {}) {
  return corpus_bleu(candidates, references, options).score;
}

std::string to_string(BleuSmooth s);
BleuSmooth parse_bleu_smooth(std::string_view s);

}  // namespace tear
