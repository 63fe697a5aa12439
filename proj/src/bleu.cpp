#include "tear/bleu.hpp"

#include <cmath>
#include <map>

#include "tear/errors.hpp"
#include "tear/util.hpp"

namespace tear {

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// ASCII punctuation split off by the first 13a rule (everything except
// letters, digits, apostrophe, comma, hyphen and period).
bool is_13a_symbol(char c) {
  return (c >= '{' && c <= '~') || (c >= '[' && c <= '`') || (c >= ' ' && c <= '&') || (c >= '(' && c <= '+') ||
         (c >= ':' && c <= '@') || c == '/';
}

// Length of the whitespace character at s[i] (Python str.isspace), 0 if none.
std::size_t whitespace_len(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c == ' ' || (c >= 0x09 && c <= 0x0D) || (c >= 0x1C && c <= 0x1F)) return 1;
  if (c == 0xC2 && i + 1 < s.size()) {
    const auto d = static_cast<unsigned char>(s[i + 1]);
    if (d == 0x85 || d == 0xA0) return 2;
  }
  if (c == 0xE1 && i + 2 < s.size() && s.substr(i, 3) == "\xE1\x9A\x80") return 3;  // U+1680
  if (c == 0xE2 && i + 2 < s.size()) {
    const auto d = static_cast<unsigned char>(s[i + 1]);
    const auto e = static_cast<unsigned char>(s[i + 2]);
    if (d == 0x80 && ((e >= 0x80 && e <= 0x8A) || e == 0xA8 || e == 0xA9 || e == 0xAF)) return 3;
    if (d == 0x81 && e == 0x9F) return 3;  // U+205F
  }
  if (c == 0xE3 && i + 2 < s.size() && s.substr(i, 3) == "\xE3\x80\x80") return 3;  // U+3000
  return 0;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < s.size();) {
    if (std::size_t w = whitespace_len(s, i)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
      i += w;
    } else {
      cur.push_back(s[i++]);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

std::vector<std::string> tokenize_13a(std::string_view input) {
  std::string line(input);
  replace_all(line, "<skipped>", "");
  replace_all(line, "-\n", "");
  replace_all(line, "\n", " ");
  if (line.find('&') != std::string::npos) {
    replace_all(line, "&quot;", "\"");
    replace_all(line, "&amp;", "&");
    replace_all(line, "&lt;", "<");
    replace_all(line, "&gt;", ">");
  }
  line = " " + line + " ";

  std::string a;
  a.reserve(line.size() * 2);
  for (char c : line) {
    if (is_13a_symbol(c)) {
      a.push_back(' ');
      a.push_back(c);
      a.push_back(' ');
    } else {
      a.push_back(c);
    }
  }

  // Period/comma unless preceded by a digit.
  std::string b;
  b.reserve(a.size() * 2);
  for (std::size_t i = 0; i < a.size();) {
    if (i + 1 < a.size() && !is_digit(a[i]) && (a[i + 1] == '.' || a[i + 1] == ',')) {
      b += a[i];
      b += ' ';
      b += a[i + 1];
      b += ' ';
      i += 2;
    } else {
      b += a[i++];
    }
  }

  // Period/comma unless followed by a digit.
  std::string c;
  c.reserve(b.size() * 2);
  for (std::size_t i = 0; i < b.size();) {
    if (i + 1 < b.size() && (b[i] == '.' || b[i] == ',') && !is_digit(b[i + 1])) {
      c += ' ';
      c += b[i];
      c += ' ';
      c += b[i + 1];
      i += 2;
    } else {
      c += b[i++];
    }
  }

  // Dash preceded by a digit.
  std::string d;
  d.reserve(c.size() * 2);
  for (std::size_t i = 0; i < c.size();) {
    if (i + 1 < c.size() && is_digit(c[i]) && c[i + 1] == '-') {
      d += c[i];
      d += " - ";
      i += 2;
    } else {
      d += c[i++];
    }
  }
  return split_whitespace(d);
}

std::string to_string(BleuSmooth s) {
  switch (s) {
    case BleuSmooth::none: return "none";
    case BleuSmooth::exp: return "exp";
    case BleuSmooth::floor: return "floor";
    case BleuSmooth::add_k: return "add-k";
  }
  return "none";
}

BleuSmooth parse_bleu_smooth(std::string_view s) {
  if (s == "none") return BleuSmooth::none;
  if (s == "exp") return BleuSmooth::exp;
  if (s == "floor") return BleuSmooth::floor;
  if (s == "add-k" || s == "add_k") return BleuSmooth::add_k;
  throw ConfigError("unknown BLEU smoothing '" + std::string(s) + "' (none, exp, floor, add-k)");
}

BleuResult corpus_bleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references,
                       const BleuOptions& options) {
  if (candidates.size() != references.size())
    throw LengthMismatch(std::to_string(candidates.size()) + " candidates vs " + std::to_string(references.size()) +
                         " references");
  if (candidates.empty()) throw EmptyCorpus("BLEU needs at least one segment");

  constexpr int N = 4;
  BleuResult r;
  auto tokenize = [&](const std::string& s) {
    std::string text = options.lowercase ? to_lower_ascii(s) : s;
    return options.tokenize == BleuTokenize::tok_13a ? tokenize_13a(text) : split_whitespace(text);
  };

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto hyp = tokenize(candidates[i]);
    const auto ref = tokenize(references[i]);
    r.sys_len += hyp.size();
    r.ref_len += ref.size();
    for (int n = 1; n <= N; ++n) {
      std::map<std::vector<std::string>, int> ref_counts;
      for (std::size_t k = 0; k + n <= ref.size(); ++k)
        ++ref_counts[std::vector<std::string>(ref.begin() + k, ref.begin() + k + n)];
      std::map<std::vector<std::string>, int> hyp_counts;
      for (std::size_t k = 0; k + n <= hyp.size(); ++k)
        ++hyp_counts[std::vector<std::string>(hyp.begin() + k, hyp.begin() + k + n)];
      for (const auto& [gram, count] : hyp_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) r.correct[n - 1] += std::min(count, it->second);
      }
      if (hyp.size() >= static_cast<std::size_t>(n)) r.total[n - 1] += static_cast<double>(hyp.size() - n + 1);
    }
  }

  double k = 0.0;
  if (options.smooth == BleuSmooth::floor) k = options.smooth_value.value_or(0.1);
  if (options.smooth == BleuSmooth::add_k) k = options.smooth_value.value_or(1.0);

  const double sys = static_cast<double>(r.sys_len);
  const double ref = static_cast<double>(r.ref_len);
  if (r.sys_len < r.ref_len)
    r.brevity_penalty = r.sys_len > 0 ? std::exp(1.0 - ref / sys) : 0.0;
  else
    r.brevity_penalty = 1.0;

  double smooth_mteval = 1.0;
  for (int n = 1; n <= N; ++n) {
    if (options.smooth == BleuSmooth::add_k && n > 1) {
      r.correct[n - 1] += k;
      r.total[n - 1] += k;
    }
    if (r.total[n - 1] == 0) break;
    if (r.correct[n - 1] == 0) {
      if (options.smooth == BleuSmooth::exp) {
        smooth_mteval *= 2;
        r.precisions[n - 1] = 100.0 / (smooth_mteval * r.total[n - 1]);
      } else if (options.smooth == BleuSmooth::floor) {
        r.precisions[n - 1] = 100.0 * k / r.total[n - 1];
      }
    } else {
      r.precisions[n - 1] = 100.0 * r.correct[n - 1] / r.total[n - 1];
    }
  }

  // Geometric mean taken over ratios, not percentages, so a perfect match is exactly 100.
  double log_sum = 0.0;
  for (double p : r.precisions) log_sum += p == 0.0 ? -9999999999.0 : std::log(p / 100.0);
  r.score = 100.0 * r.brevity_penalty * std::exp(log_sum / N);

  r.signature = std::string("nrefs:1|case:") + (options.lowercase ? "lc" : "mixed") +
                "|eff:no|tok:" + (options.tokenize == BleuTokenize::tok_13a ? "13a" : "none") +
                "|smooth:" + to_string(options.smooth);
  return r;
}

}  // namespace tear
