#include "tear/corpus.hpp"

#include <map>
#include <set>

#include "tear/errors.hpp"
#include "tear/util.hpp"

namespace tear {

namespace {

std::vector<std::string> lines_of(std::string_view text) {
  auto lines = split(text, '\n');
  for (auto& l : lines)
    if (!l.empty() && l.back() == '\r') l.pop_back();
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

void require_utf8(std::string_view text, const std::string& what) {
  if (auto bad = find_invalid_utf8(text)) throw EncodingError(*bad, what + " is not valid UTF-8");
}

void check_field(const std::string& field, const std::string& what) {
  if (field.find_first_of("\t\n\r") != std::string::npos)
    throw ValidationError(what + " contains a tab or newline and cannot be written as tsv");
}

}  // namespace

TestSet parse_testset_tsv(std::string_view text, const LanguagePair& pair, std::string name) {
  validate(pair);
  require_utf8(text, name);
  const auto lines = lines_of(text);
  if (lines.empty()) throw FormatError(1, "empty test set file (a header row is required)");
  const auto header = split(lines[0], '\t');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[trim(header[i])] = i;
  for (const char* required : {"id", "source"})
    if (!col.count(required)) throw FormatError(1, std::string("missing required column '") + required + "'");

  TestSet ts;
  ts.name = std::move(name);
  ts.pair = pair;
  std::set<std::string> ids;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto cells = split(lines[n], '\t');
    if (cells.size() != header.size())
      throw FormatError(n + 1, "expected " + std::to_string(header.size()) + " columns, got " +
                                   std::to_string(cells.size()));
    Segment s;
    s.id = cells[col["id"]];
    s.pair = pair;
    s.source_text = cells[col["source"]];
    if (col.count("reference") && !cells[col["reference"]].empty()) s.reference_text = cells[col["reference"]];
    if (col.count("doc_id") && !cells[col["doc_id"]].empty()) s.doc_id = cells[col["doc_id"]];
    if (trim(s.id).empty()) throw FormatError(n + 1, "empty id");
    if (trim(s.source_text).empty()) throw FormatError(n + 1, "empty source text");
    if (!ids.insert(s.id).second) throw FormatError(n + 1, "duplicate id '" + s.id + "'");
    ts.segments.push_back(std::move(s));
  }
  return ts;
}

TestSet load_testset(const std::filesystem::path& path, const LanguagePair& pair) {
  TestSet ts = parse_testset_tsv(read_file(path), pair, path.stem().string());
  ts.provenance = path.string();
  return ts;
}

TestSet load_parallel_text(const std::filesystem::path& source_path, const std::filesystem::path& reference_path,
                           const LanguagePair& pair) {
  validate(pair);
  const std::string src = read_file(source_path);
  require_utf8(src, source_path.string());
  const auto src_lines = lines_of(src);
  std::vector<std::string> ref_lines;
  if (!reference_path.empty()) {
    const std::string ref = read_file(reference_path);
    require_utf8(ref, reference_path.string());
    ref_lines = lines_of(ref);
    if (ref_lines.size() != src_lines.size())
      throw FormatError(std::min(ref_lines.size(), src_lines.size()) + 1,
                        "source has " + std::to_string(src_lines.size()) + " lines, reference has " +
                            std::to_string(ref_lines.size()));
  }
  TestSet ts;
  ts.name = source_path.stem().string();
  ts.pair = pair;
  ts.provenance = source_path.string();
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    if (trim(src_lines[i]).empty()) throw FormatError(i + 1, "empty source line");
    Segment s;
    s.id = std::to_string(i + 1);
    s.pair = pair;
    s.source_text = src_lines[i];
    if (!ref_lines.empty()) s.reference_text = ref_lines[i];
    ts.segments.push_back(std::move(s));
  }
  return ts;
}

TestSet load_parallel_text(const std::filesystem::path& source_path, const LanguagePair& pair) {
  return load_parallel_text(source_path, {}, pair);
}

std::string testset_to_tsv(const TestSet& ts) {
  bool refs = false, docs = false;
  for (const auto& s : ts.segments) {
    refs = refs || s.reference_text.has_value();
    docs = docs || s.doc_id.has_value();
  }
  std::string out = "id\tsource";
  if (refs) out += "\treference";
  if (docs) out += "\tdoc_id";
  out += "\n";
  for (const auto& s : ts.segments) {
    check_field(s.id, "id");
    check_field(s.source_text, "source of " + s.id);
    out += s.id + "\t" + s.source_text;
    if (refs) {
      check_field(s.reference_text.value_or(""), "reference of " + s.id);
      out += "\t" + s.reference_text.value_or("");
    }
    if (docs) {
      check_field(s.doc_id.value_or(""), "doc_id of " + s.id);
      out += "\t" + s.doc_id.value_or("");
    }
    out += "\n";
  }
  return out;
}

void save_testset(const TestSet& ts, const std::filesystem::path& path) { write_file_atomic(path, testset_to_tsv(ts)); }

TestSet sample_testset(const TestSet& ts, std::size_t n, std::int64_t seed) {
  if (n > ts.segments.size())
    throw SampleTooLarge("cannot sample " + std::to_string(n) + " of " + std::to_string(ts.segments.size()) +
                         " segments");
  TestSet out = ts;
  out.segments.clear();
  for (auto i : sample_indices(ts.segments.size(), n, derive_seed(seed, "sample:" + ts.pair.tag())))
    out.segments.push_back(ts.segments[i]);
  if (!ts.provenance.empty()) out.provenance = ts.provenance + "; sample n=" + std::to_string(n) + " seed=" +
                                               std::to_string(seed);
  return out;
}

std::vector<MqmRow> parse_mqm_dump(std::string_view text) {
  require_utf8(text, "MQM dump");
  const auto lines = lines_of(text);
  if (lines.empty()) throw FormatError(1, "empty MQM dump (a header row is required)");
  const auto header = split(lines[0], '\t');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[trim(header[i])] = i;
  for (const char* required : {"system", "segment_id", "severity", "category"})
    if (!col.count(required)) throw FormatError(1, std::string("missing required column '") + required + "'");
  std::vector<MqmRow> rows;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    auto cells = split(lines[n], '\t');
    // A trailing empty span column may be dropped by editors.
    if (col.count("span") && cells.size() + 1 == header.size() && col["span"] == header.size() - 1)
      cells.emplace_back();
    if (cells.size() != header.size())
      throw FormatError(n + 1, "expected " + std::to_string(header.size()) + " columns, got " +
                                   std::to_string(cells.size()));
    MqmRow r;
    r.system = cells[col["system"]];
    r.segment_id = cells[col["segment_id"]];
    r.severity = cells[col["severity"]];
    r.category = cells[col["category"]];
    if (col.count("span") && !cells[col["span"]].empty()) r.span = cells[col["span"]];
    r.line = n + 1;
    if (r.system.empty() || r.segment_id.empty()) throw FormatError(n + 1, "empty system or segment id");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<MqmRow> load_mqm_dump(const std::filesystem::path& path) { return parse_mqm_dump(read_file(path)); }

}  // namespace tear
