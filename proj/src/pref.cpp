#include "tear/pref.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <set>

#include "tear/errors.hpp"
#include "tear/json_io.hpp"
#include "tear/util.hpp"

namespace tear {

namespace {

constexpr int kSessionFormatVersion = 1;

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void append_durably(const std::filesystem::path& path, const std::string& line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw ValidationError("cannot open judgment log " + path.string());
  std::size_t done = 0;
  while (done < line.size()) {
    const ssize_t n = ::write(fd, line.data() + done, line.size() - done);
    if (n < 0) {
      ::close(fd);
      throw ValidationError("write to judgment log failed");
    }
    done += static_cast<std::size_t>(n);
  }
  const int rc = ::fsync(fd);
  ::close(fd);
  if (rc != 0) throw ValidationError("fsync of judgment log failed");
}

}  // namespace

CandidateSet CandidateSet::from_archive(const RunArchive& archive) {
  CandidateSet c;
  c.system = archive.manifest.label.empty() ? archive.manifest.strategy + ":" + archive.manifest.config.translate_model
                                            : archive.manifest.label;
  std::map<std::string, std::string> sources;
  for (const auto& s : archive.segments) sources[s.id] = s.source_text;
  for (const auto& r : archive.records) {
    auto it = sources.find(r.segment_id);
    if (it == sources.end()) throw CorruptArchive("archive lacks the source of segment " + r.segment_id);
    c.texts[r.segment_id] = r.final_text;
    c.sources[r.segment_id] = it->second;
  }
  return c;
}

struct SessionStore::Session {
  struct Task {
    std::string pair_id;
    std::string source;
    std::string first_text;
    std::string second_text;
    bool first_is_a = true;
  };

  std::string id;
  std::filesystem::path dir;
  std::string first_system;
  std::string second_system;
  SessionOptions options;
  std::vector<Task> tasks;
  std::map<std::string, std::size_t> index;  // pair_id -> task
  std::vector<PreferenceJudgment> judgments;
  std::set<std::pair<std::string, std::string>> judged;  // (annotator, pair_id)
  std::map<std::string, std::size_t> judged_count;        // annotator -> count
  std::map<std::string, std::vector<std::size_t>> orders;
  std::mutex mu;

  json to_json() const {
    json t = json::array();
    for (const auto& task : tasks)
      t.push_back({{"pair_id", task.pair_id},
                   {"source", task.source},
                   {"first", task.first_text},
                   {"second", task.second_text},
                   {"a_system", task.first_is_a ? first_system : second_system}});
    return json{{"format_version", kSessionFormatVersion},
                {"id", id},
                {"first_system", first_system},
                {"second_system", second_system},
                {"seed", options.seed},
                {"roster", options.roster},
                {"lazy_roster", options.lazy_roster},
                {"tasks", t}};
  }

  void save_manifest() const { write_file_atomic(dir / "session.json", to_json().dump(2) + "\n"); }

  bool on_roster(const std::string& annotator) const {
    return std::find(options.roster.begin(), options.roster.end(), annotator) != options.roster.end();
  }

  void admit(const std::string& annotator) {
    if (annotator.empty()) throw UnknownAnnotator("annotator id is empty");
    if (on_roster(annotator)) return;
    if (!options.lazy_roster) throw UnknownAnnotator("'" + annotator + "' is not on the roster of session " + id);
    options.roster.push_back(annotator);
    save_manifest();
  }

  const std::vector<std::size_t>& order_for(const std::string& annotator) {
    auto it = orders.find(annotator);
    if (it != orders.end()) return it->second;
    std::vector<std::size_t> order(tasks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    SeededRng rng(derive_seed(options.seed, "order:" + annotator));
    rng.shuffle(order);
    return orders.emplace(annotator, std::move(order)).first->second;
  }

  void record(const PreferenceJudgment& j) {
    judged.insert({j.annotator_id, j.pair_id});
    ++judged_count[j.annotator_id];
    judgments.push_back(j);
  }

  std::map<std::string, std::string> side_map() const {
    std::map<std::string, std::string> m;
    for (const auto& t : tasks) m[t.pair_id] = t.first_is_a ? first_system : second_system;
    return m;
  }
};

SessionStore::SessionStore(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

SessionStore::~SessionStore() = default;

SessionInfo SessionStore::create_session(const CandidateSet& first, const CandidateSet& second,
                                         const SessionOptions& options) {
  if (first.system == second.system) throw ValidationError("the two systems need distinct names");
  std::vector<std::string> missing;
  for (const auto& [id, _] : first.texts)
    if (!second.texts.count(id)) missing.push_back(id);
  for (const auto& [id, _] : second.texts)
    if (!first.texts.count(id)) missing.push_back(id);
  if (!missing.empty())
    throw SegmentMismatch(std::to_string(missing.size()) + " segment ids are not shared, first: " + missing.front());
  if (first.texts.empty()) throw SegmentMismatch("no segments to compare");

  auto s = std::make_unique<Session>();
  s->first_system = first.system;
  s->second_system = second.system;
  s->options = options;
  SeededRng sides(derive_seed(options.seed, "sides"));
  for (const auto& [id, text] : first.texts) {
    Session::Task t;
    t.pair_id = id;
    auto src = first.sources.find(id);
    t.source = src != first.sources.end() ? src->second : second.sources.at(id);
    t.first_text = text;
    t.second_text = second.texts.at(id);
    t.first_is_a = sides.below(2) == 0;
    s->index[id] = s->tasks.size();
    s->tasks.push_back(std::move(t));
  }

  std::lock_guard lock(mu_);
  const std::string base = sha256_hex(canonical_encode({first.system, second.system, std::to_string(options.seed),
                                                        std::to_string(s->tasks.size())}))
                               .substr(0, 12);
  std::string id = base;
  for (int n = 2; std::filesystem::exists(root_ / id) || sessions_.count(id); ++n) id = base + "-" + std::to_string(n);
  s->id = id;
  s->dir = root_ / id;
  std::filesystem::create_directories(s->dir);
  s->save_manifest();
  SessionInfo info{id, s->tasks.size()};
  sessions_[id] = std::move(s);
  return info;
}

SessionStore::Session& SessionStore::open(const std::string& id) {
  std::lock_guard lock(mu_);
  if (auto it = sessions_.find(id); it != sessions_.end()) return *it->second;
  const bool safe = !id.empty() && id.find_first_of("/\\.") == std::string::npos;
  if (!safe || !std::filesystem::exists(root_ / id / "session.json")) throw UnknownSession("no session '" + id + "'");

  auto s = std::make_unique<Session>();
  s->id = id;
  s->dir = root_ / id;
  try {
    const json j = json::parse(read_file(s->dir / "session.json"));
    if (j.value("format_version", 0) > kSessionFormatVersion) throw VersionError("session " + id + " is newer");
    s->first_system = j.at("first_system").get<std::string>();
    s->second_system = j.at("second_system").get<std::string>();
    s->options.seed = j.at("seed").get<std::int64_t>();
    s->options.roster = j.at("roster").get<std::vector<std::string>>();
    s->options.lazy_roster = j.at("lazy_roster").get<bool>();
    for (const auto& t : j.at("tasks")) {
      Session::Task task{t.at("pair_id").get<std::string>(), t.at("source").get<std::string>(),
                         t.at("first").get<std::string>(), t.at("second").get<std::string>(),
                         t.at("a_system").get<std::string>() == s->first_system};
      s->index[task.pair_id] = s->tasks.size();
      s->tasks.push_back(std::move(task));
    }
  } catch (const json::exception& e) {
    throw CorruptArchive("session " + id + ": " + e.what());
  }
  const auto log = s->dir / "judgments.jsonl";
  if (std::filesystem::exists(log)) {
    const std::string text = read_file(log);
    auto lines = split(text, '\n');
    // Whatever follows the last newline was never acknowledged.
    lines.pop_back();
    for (const auto& line : lines) {
      if (line.empty()) continue;
      try {
        s->record(json::parse(line).get<PreferenceJudgment>());
      } catch (const json::exception& e) {
        throw CorruptArchive("session " + id + " judgment log: " + e.what());
      }
    }
  }
  return *sessions_.emplace(id, std::move(s)).first->second;
}

NextTask SessionStore::next_task(const std::string& session_id, const std::string& annotator) {
  Session& s = open(session_id);
  std::lock_guard lock(s.mu);
  s.admit(annotator);
  NextTask next;
  next.progress = {s.judged_count[annotator], s.tasks.size()};
  for (std::size_t i : s.order_for(annotator)) {
    const auto& t = s.tasks[i];
    if (s.judged.count({annotator, t.pair_id})) continue;
    next.task = PreferenceTask{t.pair_id, t.source, t.first_is_a ? t.first_text : t.second_text,
                               t.first_is_a ? t.second_text : t.first_text};
    break;
  }
  return next;
}

Progress SessionStore::submit(const std::string& session_id, PreferenceJudgment judgment) {
  Session& s = open(session_id);
  std::lock_guard lock(s.mu);
  if (!s.index.count(judgment.pair_id))
    throw UnknownTask("pair '" + judgment.pair_id + "' is not part of session " + session_id);
  s.admit(judgment.annotator_id);
  if (s.judged.count({judgment.annotator_id, judgment.pair_id}))
    throw DuplicateJudgment("'" + judgment.annotator_id + "' already judged pair '" + judgment.pair_id + "'");
  if (judgment.timestamp.empty()) judgment.timestamp = utc_now();
  append_durably(s.dir / "judgments.jsonl", json(judgment).dump() + "\n");
  s.record(judgment);
  return {s.judged_count[judgment.annotator_id], s.tasks.size()};
}

std::vector<PreferenceJudgment> SessionStore::judgments(const std::string& session_id) {
  Session& s = open(session_id);
  std::lock_guard lock(s.mu);
  return s.judgments;
}

std::map<std::string, std::string> SessionStore::side_map(const std::string& session_id) {
  Session& s = open(session_id);
  std::lock_guard lock(s.mu);
  return s.side_map();
}

WinTieLoss SessionStore::win_tie_loss(const std::string& session_id) {
  Session& s = open(session_id);
  std::lock_guard lock(s.mu);
  return tear::win_tie_loss(s.judgments, s.side_map(), s.first_system, s.second_system);
}

SessionTally SessionStore::tally(const std::string& session_id) {
  const WinTieLoss w = win_tie_loss(session_id);
  return {w.first_wins, w.ties, w.second_wins, w.total()};
}

}  // namespace tear
