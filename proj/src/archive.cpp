#include "tear/archive.hpp"

#include "tear/errors.hpp"
#include "tear/util.hpp"

namespace tear {

namespace {

constexpr const char* kDigestFile = "digest";

json manifest_json(const ArchiveManifest& m) {
  return json{{"format_version", m.format_version},
              {"tool_version", m.tool_version},
              {"config", m.config},
              {"strategy", m.strategy},
              {"label", m.label},
              {"pair", m.pair},
              {"paths", m.paths}};
}

ArchiveManifest manifest_from(const json& j) {
  ArchiveManifest m;
  m.format_version = j.at("format_version").get<int>();
  m.tool_version = j.value("tool_version", "");
  m.config = j.at("config").get<RunConfig>();
  m.strategy = j.value("strategy", "tear");
  m.label = j.value("label", "");
  m.pair = j.at("pair").get<LanguagePair>();
  m.paths = j.value("paths", std::map<std::string, std::string>{});
  return m;
}

std::string digest_of(const std::map<std::string, std::string>& files) {
  std::vector<std::string_view> fields;
  for (const auto& [name, data] : files) {
    if (name == kDigestFile) continue;
    fields.push_back(name);
    fields.push_back(data);
  }
  return sha256_hex(canonical_encode(fields));
}

}  // namespace

std::map<std::string, std::string> archive_files(const RunArchive& a) {
  std::map<std::string, std::string> files;
  files["manifest.json"] = manifest_json(a.manifest).dump(2) + "\n";

  std::string records;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    json line = {{"record", a.records[i]}};
    if (i < a.segments.size()) line["segment"] = a.segments[i];
    records += line.dump() + "\n";
  }
  files["records.jsonl"] = records;

  std::string scores;
  for (const auto& [id, s] : a.scores)
    scores += json{{"segment_id", id}, {"initial", s.initial}, {"final", s.final}}.dump() + "\n";
  files["scores.jsonl"] = scores;

  json summary = a.summary;
  summary["corpus"] = {{"initial", a.corpus_initial}, {"final", a.corpus_final}};
  files["summary.json"] = summary.dump(2) + "\n";

  if (a.meta_eval) files["meta_eval.json"] = a.meta_eval->dump(2) + "\n";
  if (a.preference) files["preference.json"] = a.preference->dump(2) + "\n";
  files[kDigestFile] = "sha256 " + digest_of(files) + "\n";
  return files;
}

void save_run(const RunArchive& archive, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto files = archive_files(archive);
  for (const char* optional_file : {"meta_eval.json", "preference.json"})
    if (!files.count(optional_file)) std::filesystem::remove(dir / optional_file);
  // The digest goes last so a crash mid-save leaves a detectably corrupt archive.
  for (const auto& [name, data] : files)
    if (name != kDigestFile) write_file_atomic(dir / name, data);
  write_file_atomic(dir / kDigestFile, files.at(kDigestFile));
}

void save_manifest(const ArchiveManifest& manifest, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::filesystem::remove(dir / kDigestFile);
  write_file_atomic(dir / "manifest.json", manifest_json(manifest).dump(2) + "\n");
}

RunArchive load_run(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw CorruptArchive(dir.string() + " is not a run archive directory");
  auto read = [&](const std::string& name) -> std::string {
    if (!std::filesystem::exists(dir / name)) throw CorruptArchive(dir.string() + ": missing " + name);
    return read_file(dir / name);
  };

  std::map<std::string, std::string> files;
  files["manifest.json"] = read("manifest.json");
  RunArchive a;
  json manifest;
  try {
    manifest = json::parse(files["manifest.json"]);
  } catch (const json::exception&) {
    throw CorruptArchive(dir.string() + ": manifest.json is not valid JSON");
  }
  const int version = manifest.value("format_version", 0);
  if (version > kArchiveFormatVersion)
    throw VersionError(dir.string() + ": archive format " + std::to_string(version) + " is newer than supported " +
                       std::to_string(kArchiveFormatVersion));
  if (version < 1) throw CorruptArchive(dir.string() + ": manifest lacks a format_version");

  for (const char* name : {"records.jsonl", "scores.jsonl", "summary.json"}) files[name] = read(name);
  for (const char* name : {"meta_eval.json", "preference.json"})
    if (std::filesystem::exists(dir / name)) files[name] = read_file(dir / name);
  const std::string digest_line = trim(read(kDigestFile));
  if (digest_line != "sha256 " + digest_of(files)) throw CorruptArchive(dir.string() + ": digest mismatch");

  try {
    a.manifest = manifest_from(manifest);
    for (const auto& line : split(files["records.jsonl"], '\n')) {
      if (trim(line).empty()) continue;
      json j = json::parse(line);
      a.records.push_back(j.at("record").get<TearRecord>());
      if (j.contains("segment")) a.segments.push_back(j["segment"].get<Segment>());
    }
    for (const auto& line : split(files["scores.jsonl"], '\n')) {
      if (trim(line).empty()) continue;
      json j = json::parse(line);
      SegmentScores s;
      s.initial = j.at("initial").get<std::map<std::string, double>>();
      s.final = j.at("final").get<std::map<std::string, double>>();
      a.scores[j.at("segment_id").get<std::string>()] = std::move(s);
    }
    json summary = json::parse(files["summary.json"]);
    a.summary = summary.get<ExperimentSummary>();
    if (summary.contains("corpus")) {
      a.corpus_initial = summary["corpus"].value("initial", std::map<std::string, double>{});
      a.corpus_final = summary["corpus"].value("final", std::map<std::string, double>{});
    }
    if (files.count("meta_eval.json")) a.meta_eval = json::parse(files["meta_eval.json"]);
    if (files.count("preference.json")) a.preference = json::parse(files["preference.json"]);
  } catch (const json::exception& e) {
    throw CorruptArchive(dir.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw CorruptArchive(dir.string() + ": " + e.what());
  }
  return a;
}

}  // namespace tear
