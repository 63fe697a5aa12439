#include "tear/mqm.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "tear/core.hpp"
#include "tear/embedded.hpp"
#include "tear/errors.hpp"
#include "tear/util.hpp"

namespace tear {

std::string to_string(Severity s) {
  switch (s) {
    case Severity::critical: return "critical";
    case Severity::major: return "major";
    case Severity::minor: return "minor";
  }
  return "minor";
}

std::optional<Severity> parse_severity(std::string_view token) {
  const std::string t = to_lower_ascii(trim(token));
  if (t == "critical") return Severity::critical;
  if (t == "major") return Severity::major;
  if (t == "minor") return Severity::minor;
  return std::nullopt;
}

std::string ErrorCategory::label() const { return sub ? top + "/" + *sub : top; }

bool EstimationResult::has_warning(std::string_view code) const {
  for (const auto& w : parse_warnings)
    if (w == code || (w.size() > code.size() && w.compare(0, code.size(), code) == 0 && w[code.size()] == ':'))
      return true;
  return false;
}

bool needs_refinement(const std::vector<ErrorAnnotation>& annotations) {
  return std::any_of(annotations.begin(), annotations.end(),
                     [](const ErrorAnnotation& a) { return a.category.top != "no_error"; });
}

// ---------------------------------------------------------------- taxonomy

namespace {

std::string normalize_label_part(std::string_view part) {
  std::string out;
  for (char c : to_lower_ascii(trim(part))) {
    char mapped = (c == ' ' || c == '-' || c == '\t') ? '_' : c;
    if (mapped == '_' && (out.empty() || out.back() == '_')) continue;
    out.push_back(mapped);
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

std::string canonical_top(std::string top) {
  if (top == "locale" || top == "locale_conventions") return "locale_convention";
  if (top == "nontranslation" || top == "non_translation_error") return "non_translation";
  if (top == "source") return "source_error";
  if (top == "noerror" || top == "no_errors") return "no_error";
  return top;
}

std::string canonical_sub(const std::string& top, std::string sub) {
  if (top == "locale_convention") {
    constexpr std::string_view suffix = "_format";
    if (sub.size() > suffix.size() && sub.compare(sub.size() - suffix.size(), suffix.size(), suffix) == 0)
      sub.resize(sub.size() - suffix.size());
  }
  if (top == "accuracy" && sub == "untranslated") return "untranslated_text";
  if (top == "terminology" && sub == "inappropriate_for_the_context") return "inappropriate_for_context";
  if (top == "fluency" && sub == "encoding") return "character_encoding";
  return sub;
}

}  // namespace

const Taxonomy& Taxonomy::builtin() {
  static const Taxonomy tax = [] {
    auto data = embedded::find("mqm_hierarchy.tsv");
    if (!data) throw TemplateError("built-in MQM hierarchy missing");
    return parse(*data);
  }();
  return tax;
}

Taxonomy Taxonomy::parse(std::string_view tsv) {
  Taxonomy t;
  auto lines = split(tsv, '\n');
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string line = lines[n];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (n == 0 && !cols.empty() && cols[0] == "top") continue;
    if (cols.size() != 3) throw FormatError(n + 1, "hierarchy rows need top, sub, description");
    if (cols[0].empty()) throw FormatError(n + 1, "empty top-level category");
    t.entries_.push_back({cols[0], cols[1], cols[2]});
  }
  return t;
}

Taxonomy Taxonomy::load(const std::filesystem::path& path) { return parse(read_file(path)); }

bool Taxonomy::has_top(std::string_view top) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.top == top; });
}

bool Taxonomy::contains(std::string_view top, std::optional<std::string_view> sub) const {
  if (!sub) return has_top(top);
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.top == top && !e.sub.empty() && e.sub == *sub; });
}

ErrorCategory Taxonomy::classify(std::string_view label) const {
  const std::string cleaned = to_lower_ascii(trim(label));
  auto slash = cleaned.find('/');
  std::string top = canonical_top(normalize_label_part(cleaned.substr(0, slash)));
  std::optional<std::string> sub;
  bool well_formed = true;
  if (slash != std::string::npos) {
    std::string rest = cleaned.substr(slash + 1);
    if (rest.find('/') != std::string::npos) well_formed = false;
    sub = canonical_sub(top, normalize_label_part(rest));
    if (sub->empty()) sub.reset();
  }
  if (well_formed && !top.empty() && contains(top, sub ? std::optional<std::string_view>(*sub) : std::nullopt))
    return {top, sub, std::nullopt};
  return {"other", std::nullopt, cleaned};
}

std::string Taxonomy::display(const ErrorCategory& category) {
  if (category.raw_label) return *category.raw_label;
  std::string top = category.top;
  if (top == "locale_convention") top = "locale convention";
  else if (top == "source_error") top = "source error";
  else if (top == "non_translation") top = "non-translation";
  else if (top == "no_error") top = "no-error";
  if (!category.sub) return top;
  std::string sub = *category.sub;
  std::replace(sub.begin(), sub.end(), '_', ' ');
  if (category.top == "locale_convention") sub += " format";
  return top + "/" + sub;
}

// ---------------------------------------------------------------- parsing

namespace {

struct QuoteChar {
  std::string_view open;
  std::string_view close;
};

constexpr QuoteChar kQuotes[] = {
    {"\"", "\""},
    {"'", "'"},
    {"\xE2\x80\x9C", "\xE2\x80\x9D"},  // “ ”
    {"\xE2\x80\x98", "\xE2\x80\x99"},  // ‘ ’
};

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }
bool ends_with(std::string_view s, std::string_view p) {
  return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}

// Length of a quote character at the start of s, 0 if none.
std::size_t quote_at(std::string_view s) {
  for (const auto& q : kQuotes) {
    if (starts_with(s, q.open)) return q.open.size();
    if (starts_with(s, q.close)) return q.close.size();
  }
  return 0;
}

// Length of a quote character ending s, 0 if none.
std::size_t quote_before(std::string_view s) {
  for (const auto& q : kQuotes) {
    if (ends_with(s, q.open)) return q.open.size();
    if (ends_with(s, q.close)) return q.close.size();
  }
  return 0;
}

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

struct Marker {
  Severity severity;
  std::size_t start;  // first byte belonging to the marker
  std::size_t body;   // first byte after the colon
};

std::vector<Marker> find_markers(std::string_view text) {
  static constexpr std::pair<std::string_view, Severity> kWords[] = {
      {"critical", Severity::critical}, {"major", Severity::major}, {"minor", Severity::minor}};
  std::vector<Marker> markers;
  const std::string lower = to_lower_ascii(text);
  std::size_t i = 0;
  while (i < lower.size()) {
    bool matched = false;
    for (auto [word, sev] : kWords) {
      if (lower.compare(i, word.size(), word) != 0) continue;
      std::string_view before = std::string_view(text).substr(0, i);
      std::size_t start = i;
      bool boundary_ok = before.empty();
      if (!boundary_ok) {
        const char p = before.back();
        if (is_ws(p) || p == '{' || p == ',' || p == '(' || p == '[' || p == '*' || p == '-') boundary_ok = true;
        if (std::size_t q = quote_before(before)) {
          boundary_ok = true;
          start -= q;
        }
      }
      if (!boundary_ok) continue;
      std::size_t j = i + word.size();
      while (j < text.size()) {
        if (std::size_t q = quote_at(text.substr(j))) {
          j += q;
        } else if (text[j] == '*' || text[j] == ' ' || text[j] == '\t') {
          ++j;
        } else {
          break;
        }
      }
      if (j < text.size() && text[j] == ':') {
        markers.push_back({sev, start, j + 1});
        i = j + 1;
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return markers;
}

bool is_label_char(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == ' ' || c == '/' || c == '-' || c == '_';
}

// True when `rest` (the text after a ';') begins a new "category - span" entry.
bool looks_like_entry_start(std::string_view rest) {
  std::size_t i = 0;
  while (i < rest.size() && is_ws(rest[i])) ++i;
  if (i >= rest.size() || !std::isalpha(static_cast<unsigned char>(rest[i]))) return false;
  std::size_t j = i;
  while (j < rest.size() && is_label_char(rest[j])) ++j;
  if (j == rest.size() || rest[j] == ';') return true;
  std::string_view region = rest.substr(i, j - i);
  while (!region.empty() && is_ws(region.back())) region.remove_suffix(1);
  return region.size() >= 2 && region.back() == '-' && region[region.size() - 2] == ' ';
}

std::size_t find_span_separator(std::string_view s);
const QuoteChar* opening_quote(std::string_view s);

// End of a quoted span that starts right after the separator of the entry
// beginning at `start`, or npos when the entry has no closed quoted span.
std::size_t quoted_span_end(std::string_view line, std::size_t start) {
  const std::string_view entry = line.substr(start);
  const std::size_t sep = find_span_separator(entry);
  if (sep == std::string_view::npos || entry.substr(0, sep).find(';') != std::string_view::npos)
    return std::string_view::npos;
  std::size_t k = sep + 1;
  while (k < entry.size() && is_ws(entry[k])) ++k;
  const QuoteChar* q = opening_quote(entry.substr(k));
  if (!q) return std::string_view::npos;
  k += q->open.size();
  for (;;) {
    const std::size_t close = entry.find(q->close, k);
    if (close == std::string_view::npos) return std::string_view::npos;
    std::size_t after = close + q->close.size();
    std::size_t t = after;
    while (t < entry.size() && (is_ws(entry[t]) || entry[t] == ',')) ++t;
    if (t == entry.size() || entry[t] == ';') return start + after;
    k = after;
  }
}

std::vector<std::string> split_entries(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t protected_until = quoted_span_end(line, 0);
  for (std::size_t p = 0; p < line.size(); ++p) {
    if (protected_until != std::string_view::npos && p < protected_until) continue;
    if (line[p] == ';' && looks_like_entry_start(line.substr(p + 1))) {
      out.emplace_back(line.substr(start, p - start));
      start = p + 1;
      protected_until = quoted_span_end(line, start);
    }
  }
  out.emplace_back(line.substr(start));
  return out;
}

std::string strip_piece(std::string_view piece) {
  std::string s = trim(piece);
  bool changed = true;
  while (changed && !s.empty()) {
    changed = false;
    const char f = s.front();
    if (f == '{' || f == '[' || f == ',' || f == '*' || f == '(') {
      s.erase(0, 1);
      changed = true;
    } else if (starts_with(s, "- ") || starts_with(s, "\xE2\x80\xA2")) {  // bullets
      s.erase(0, s[0] == '-' ? 2 : 3);
      changed = true;
    } else if (std::isdigit(static_cast<unsigned char>(f))) {
      std::size_t k = 0;
      while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
      if (k + 1 < s.size() && (s[k] == '.' || s[k] == ')') && s[k + 1] == ' ') {
        s.erase(0, k + 2);
        changed = true;
      }
    }
    while (!s.empty() && (s.back() == '}' || s.back() == ']' || s.back() == ',' || s.back() == '*')) {
      s.pop_back();
      changed = true;
    }
    std::string t = trim(s);
    if (t != s) {
      s = std::move(t);
      changed = true;
    }
  }
  return s;
}

bool only_quotes(std::string_view s) {
  while (!s.empty()) {
    if (is_ws(s.front())) {
      s.remove_prefix(1);
    } else if (std::size_t q = quote_at(s)) {
      s.remove_prefix(q);
    } else {
      return false;
    }
  }
  return true;
}

std::string clean_category(std::string_view text) {
  std::string s = trim(text);
  bool changed = true;
  while (changed && !s.empty()) {
    changed = false;
    if (std::size_t q = quote_at(s)) {
      s.erase(0, q);
      changed = true;
    }
    if (std::size_t q = quote_before(s)) {
      s.resize(s.size() - q);
      changed = true;
    }
    while (!s.empty() && (s.back() == '.' || s.back() == ',' || s.back() == ':')) {
      s.pop_back();
      changed = true;
    }
    std::string t = trim(s);
    if (t != s) {
      s = std::move(t);
      changed = true;
    }
  }
  return to_lower_ascii(s);
}

bool is_no_error(std::string_view c) {
  return c == "no-error" || c == "no error" || c == "no_error" || c == "no errors" || c == "none" || c == "n/a" ||
         c == "no-errors";
}

bool plausible_label(std::string_view label) {
  if (label.empty() || label.size() > 64) return false;
  if (!std::isalpha(static_cast<unsigned char>(label.front()))) return false;
  if (std::count(label.begin(), label.end(), '/') > 1) return false;
  for (char c : label)
    if (!is_label_char(c)) return false;
  for (const auto& part : split(label, '/')) {
    auto words = split(normalize_whitespace(part), ' ');
    if (words.size() > 4) return false;
  }
  return true;
}

const QuoteChar* opening_quote(std::string_view s) {
  for (const auto& q : kQuotes)
    if (starts_with(s, q.open)) return &q;
  return nullptr;
}

std::optional<std::string> unquote_span(std::string_view text) {
  std::string s = trim(text);
  for (int guard = 0; guard < 4 && !s.empty(); ++guard) {
    const QuoteChar* q = opening_quote(s);
    if (!q) {
      while (!s.empty() && (s.back() == ',' || s.back() == '}')) s.pop_back();
      s = trim(s);
      break;
    }
    if (s.size() >= q->open.size() + q->close.size() && ends_with(s, q->close)) {
      std::string_view inner = std::string_view(s).substr(q->open.size(), s.size() - q->open.size() - q->close.size());
      if (inner.find(q->open) == std::string_view::npos && inner.find(q->close) == std::string_view::npos) {
        s = trim(inner);
        break;
      }
      break;  // balanced by a quote that also occurs inside: keep verbatim
    }
    // Unbalanced tail: drop one stray trailing char and retry.
    if (!s.empty() && (s.back() == ',' || s.back() == '}')) {
      s.pop_back();
    } else if (std::size_t k = quote_before(s)) {
      s.resize(s.size() - k);
    } else {
      break;
    }
    s = trim(s);
  }
  if (s.empty()) return std::nullopt;
  return s;
}

std::string snippet(std::string_view s) {
  std::string out = normalize_whitespace(s);
  if (out.size() > 40) out = out.substr(0, 40) + "...";
  return out;
}

// First spaced hyphen separates the category from the span.
std::size_t find_span_separator(std::string_view s) {
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] != '-') continue;
    const bool space_before = k > 0 && is_ws(s[k - 1]);
    const bool space_after = k + 1 < s.size() && is_ws(s[k + 1]);
    if (space_before || space_after) return k;
  }
  return std::string_view::npos;
}

}  // namespace

EstimationResult parse_estimation(std::string_view raw_text, const Taxonomy& taxonomy) {
  EstimationResult result;
  result.raw_text = std::string(raw_text);
  const auto markers = find_markers(raw_text);
  bool saw_entry = false;

  struct Parsed {
    ErrorAnnotation annotation;
    std::size_t order;
  };
  std::vector<Parsed> parsed;

  for (std::size_t m = 0; m < markers.size(); ++m) {
    const std::size_t end = m + 1 < markers.size() ? markers[m + 1].start : raw_text.size();
    std::string_view body = raw_text.substr(markers[m].body, end - markers[m].body);
    for (const auto& line : split(body, '\n')) {
      for (const auto& piece_raw : split_entries(line)) {
        std::string piece = strip_piece(piece_raw);
        if (piece.empty() || only_quotes(piece)) continue;
        const std::size_t sep = find_span_separator(piece);
        std::string category_text = clean_category(piece.substr(0, sep));
        std::optional<std::string> span;
        if (sep != std::string::npos) span = unquote_span(std::string_view(piece).substr(sep + 1));
        if (category_text.empty()) continue;
        if (is_no_error(category_text)) {
          saw_entry = true;
          continue;
        }
        const bool has_slash = category_text.find('/') != std::string::npos;
        if (!plausible_label(category_text) ||
            (!has_slash && !span && !taxonomy.has_top(canonical_top(normalize_label_part(category_text))))) {
          result.parse_warnings.push_back(std::string(warning::ignored_text) + ":" + snippet(piece));
          continue;
        }
        ErrorAnnotation a;
        a.severity = markers[m].severity;
        a.category = taxonomy.classify(category_text);
        if (a.category.top == "no_error") {
          saw_entry = true;
          continue;
        }
        if (a.category.raw_label)
          result.parse_warnings.push_back(std::string(warning::remapped) + ":" + *a.category.raw_label);
        a.span = std::move(span);
        saw_entry = true;
        parsed.push_back({std::move(a), parsed.size()});
      }
    }
  }

  if (markers.empty() || !saw_entry) {
    result.parse_warnings.insert(result.parse_warnings.begin(), std::string(warning::parse_failed));
    result.annotations.clear();
    result.needs_refinement = false;
    return result;
  }

  // A non-translation error excludes every other error in the segment.
  auto nt = std::find_if(parsed.begin(), parsed.end(),
                         [](const Parsed& p) { return p.annotation.category.top == "non_translation"; });
  if (nt != parsed.end() && parsed.size() > 1) {
    Parsed keep = *nt;
    parsed.assign(1, keep);
    result.parse_warnings.emplace_back(warning::non_translation_exclusive);
  }

  std::stable_sort(parsed.begin(), parsed.end(), [](const Parsed& a, const Parsed& b) {
    return static_cast<int>(a.annotation.severity) < static_cast<int>(b.annotation.severity);
  });
  if (parsed.size() > kMaxAnnotations) {
    parsed.resize(kMaxAnnotations);
    result.parse_warnings.emplace_back(warning::clamped);
  }
  for (auto& p : parsed) result.annotations.push_back(std::move(p.annotation));
  result.needs_refinement = needs_refinement(result.annotations);
  return result;
}

// ---------------------------------------------------------------- serialization

namespace {

std::string quote_span(const std::string& span) {
  for (const auto& q : kQuotes) {
    if (span.find(q.open) == std::string::npos && span.find(q.close) == std::string::npos)
      return std::string(q.open) + span + std::string(q.close);
  }
  return span;
}

}  // namespace

std::string serialize_feedback(const std::vector<ErrorAnnotation>& annotations) {
  std::string out;
  for (Severity sev : {Severity::critical, Severity::major, Severity::minor}) {
    std::string line;
    for (const auto& a : annotations) {
      if (a.severity != sev || a.category.top == "no_error") continue;
      if (!line.empty()) line += "; ";
      line += Taxonomy::display(a.category);
      if (a.span) line += " - " + quote_span(*a.span);
    }
    if (!out.empty()) out += "\n";
    out += to_string(sev) + ": " + (line.empty() ? "no-error" : line);
  }
  return out;
}

std::string serialize_feedback(const EstimationResult& result) { return serialize_feedback(result.annotations); }

// ---------------------------------------------------------------- scoring

double SeverityWeights::of(Severity s) const {
  switch (s) {
    case Severity::critical: return critical;
    case Severity::major: return major;
    case Severity::minor: return minor;
  }
  return minor;
}

MQMScore mqm_score(const std::vector<ErrorAnnotation>& annotations, const SeverityWeights& weights,
                   std::optional<double> cap) {
  if (!(weights.critical > 0) || !(weights.major > 0) || !(weights.minor > 0))
    throw WeightError("severity weights must be positive");
  if (cap && !(*cap > 0)) throw WeightError("score cap must be positive");
  double penalty = 0.0;
  for (const auto& a : annotations)
    if (a.category.top != "no_error") penalty += weights.of(a.severity);
  MQMScore score;
  score.weights_used = weights;
  score.value = penalty == 0.0 ? 0.0 : -penalty;
  if (cap && score.value < -*cap) {
    score.value = -*cap;
    score.capped = true;
  }
  return score;
}

HumanMqmScores load_human_mqm(const std::vector<MqmRow>& rows, const SeverityWeights& weights,
                              std::optional<double> cap, const Taxonomy& taxonomy) {
  std::map<SystemSegmentKey, std::vector<ErrorAnnotation>> grouped;
  std::map<SystemSegmentKey, bool> missing;
  for (const auto& row : rows) {
    const SystemSegmentKey key{row.system, row.segment_id};
    const std::string token = to_lower_ascii(trim(row.severity));
    grouped[key];  // a no-error row still creates the cell
    if (token == "missing") {
      missing[key] = true;
      continue;
    }
    if (is_no_error(token) || token == "neutral") continue;
    auto sev = parse_severity(token);
    if (!sev) throw FormatError(row.line, "unknown severity '" + row.severity + "'");
    ErrorAnnotation a;
    a.severity = *sev;
    a.category = taxonomy.classify(row.category);
    a.span = row.span;
    grouped[key].push_back(std::move(a));
  }
  HumanMqmScores out;
  for (auto& [key, annotations] : grouped) {
    if (missing.count(key)) {
      ++out.excluded;
      continue;
    }
    out.scores[key] = mqm_score(annotations, weights, cap);
  }
  return out;
}

}  // namespace tear
