#pragma once

#include <random>
#include <string>
#include <vector>

#include "tear/mqm.hpp"
#include "tear/prompts.hpp"

namespace tear::testing {

// The "MQM annotations:" block of worked example n (1-based) in the few-shot
// estimate template, cut at the next "Example" header or blank line.
inline std::string estimate_example_block(int n) {
  const std::string& t = TemplateStore::builtin().get(PromptKind::estimate_few);
  const std::string header = "Example" + std::to_string(n) + ":";
  auto at = t.find(header);
  if (at == std::string::npos) return {};
  const std::string marker = "MQM annotations:\n";
  auto body = t.find(marker, at);
  if (body == std::string::npos) return {};
  body += marker.size();
  auto end = t.find("\nExample", body);
  auto blank = t.find("\n\n", body);
  if (blank < end) end = blank;
  return t.substr(body, end == std::string::npos ? std::string::npos : end - body);
}

inline ErrorAnnotation ann(Severity s, std::string top, std::string sub, std::string span) {
  ErrorAnnotation a;
  a.severity = s;
  a.category.top = std::move(top);
  if (!sub.empty()) a.category.sub = std::move(sub);
  a.span = std::move(span);
  return a;
}

inline std::vector<ErrorAnnotation> expected_example(int n) {
  using S = Severity;
  switch (n) {
    case 1:
      return {ann(S::critical, "accuracy", "addition", "of high-speed rail"),
              ann(S::major, "accuracy", "mistranslation", "go to the reviews"),
              ann(S::minor, "style", "awkward", "etc.,")};
    case 2:
      return {ann(S::major, "accuracy", "mistranslation", "involvement"),
              ann(S::major, "accuracy", "omission", "the account holder"),
              ann(S::minor, "fluency", "grammar", "wäre"), ann(S::minor, "fluency", "register", "dir")};
    case 3:
      return {ann(S::major, "accuracy", "addition", "ve Vídni"), ann(S::major, "accuracy", "omission", "the stop-start"),
              ann(S::minor, "terminology", "inappropriate_for_context", "partake")};
  }
  return {};
}

// Random results shaped like parser output: at most 5 annotations ordered by
// severity, non_translation alone, needs_refinement consistent.
class ResultGenerator {
 public:
  explicit ResultGenerator(std::uint64_t seed) : rng_(seed) {
    for (const auto& e : Taxonomy::builtin().entries())
      if (e.top != "no_error") cats_.push_back({e.top, e.sub});
    cats_.push_back({"other", ""});
  }

  EstimationResult next() {
    EstimationResult r;
    const int n = pick(6);
    for (int i = 0; i < n; ++i) {
      ErrorAnnotation a;
      a.severity = static_cast<Severity>(pick(3));
      if (pick(12) == 0) {
        a.category = {"other", std::nullopt, kUnknown[pick(std::size(kUnknown))]};
      } else {
        const auto& [top, sub] = cats_[pick(cats_.size())];
        a.category.top = top;
        if (!sub.empty()) a.category.sub = sub;
      }
      // The parser only keeps an unknown label without a span when it has a slash.
      if (pick(8) != 0 || a.category.raw_label) a.span = span();
      r.annotations.push_back(std::move(a));
    }
    for (const auto& a : r.annotations)
      if (a.category.top == "non_translation") {
        const ErrorAnnotation keep = a;
        r.annotations.assign(1, keep);
        break;
      }
    std::stable_sort(r.annotations.begin(), r.annotations.end(),
                     [](const auto& x, const auto& y) { return x.severity < y.severity; });
    r.needs_refinement = needs_refinement(r.annotations);
    return r;
  }

 private:
  static constexpr const char* kUnknown[] = {"hallucination", "tone problem", "bad vibe", "formatting"};
  static constexpr const char* kWords[] = {
      "the",    "sound", "quality", "3D",     "surround!", "10.30",  "Friday's", "3-4%",  "中文",   "音质",
      "Vídni",  "wäre",  "etc.,",   "(x)",    "[y]",       "x.y",    "ratio:",   "minor", "major",  "it's",
      "\"quoted\"", "a;",  "«ok»",    "über",   "naïve",     "~dash",  "50/50",    "{b}",   "e-mail", "no-error"};

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  std::string span() {
    std::string s;
    const int words = 1 + static_cast<int>(pick(6));
    for (int i = 0; i < words; ++i) {
      if (i) s += ' ';
      s += kWords[pick(std::size(kWords))];
    }
    return s;
  }

  std::mt19937_64 rng_;
  std::vector<std::pair<std::string, std::string>> cats_;
};

}  // namespace tear::testing
