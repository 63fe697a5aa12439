#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tear/analysis.hpp"
#include "tear/archive.hpp"

namespace tear {

// The translations of one system, keyed by segment.
struct CandidateSet {
  std::string system;
  std::map<std::string, std::string> sources;  // segment id -> source
  std::map<std::string, std::string> texts;    // segment id -> translation

  static CandidateSet from_archive(const RunArchive& archive);
};

// What an annotator sees; which system is A is never part of it.
struct PreferenceTask {
  std::string pair_id;
  std::string source_text;
  std::string candidate_a;
  std::string candidate_b;
};

struct Progress {
  std::size_t judged = 0;  // by this annotator
  std::size_t total = 0;
};

struct NextTask {
  std::optional<PreferenceTask> task;  // empty once everything is judged
  Progress progress;
  bool done() const { return !task.has_value(); }
};

struct SessionOptions {
  std::int64_t seed = 1;
  std::vector<std::string> roster;
  // Unknown annotators join the roster on first contact instead of being rejected.
  bool lazy_roster = false;
};

struct SessionInfo {
  std::string id;
  std::size_t task_count = 0;
};

struct SessionTally {
  std::size_t first_wins = 0;
  std::size_t ties = 0;
  std::size_t second_wins = 0;
  std::size_t judgments = 0;
};

// File-backed sessions under `root`: <root>/<id>/session.json holds the tasks
// and side map, <root>/<id>/judgments.jsonl is the append-only judgment log.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path root);
  ~SessionStore();

  // SegmentMismatch unless both sets cover exactly the same segment ids.
  SessionInfo create_session(const CandidateSet& first, const CandidateSet& second, const SessionOptions& options);

  // UnknownSession; UnknownAnnotator when the roster is closed.
  NextTask next_task(const std::string& session_id, const std::string& annotator);
  // UnknownTask for a pair outside the session, DuplicateJudgment for a
  // second judgment by the same annotator. The judgment is on disk before return.
  Progress submit(const std::string& session_id, PreferenceJudgment judgment);

  // De-randomized counts, first system vs second as given at creation.
  SessionTally tally(const std::string& session_id);
  WinTieLoss win_tie_loss(const std::string& session_id);
  std::vector<PreferenceJudgment> judgments(const std::string& session_id);
  // pair_id -> system shown as A. Server-side only.
  std::map<std::string, std::string> side_map(const std::string& session_id);

 private:
  struct Session;
  Session& open(const std::string& id);

  std::filesystem::path root_;
  std::mutex mu_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
};

struct PrefServerOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  std::string admin_token;
  // Allowed origin for browser clients.
  std::string cors_origin = "*";
};

// HTTP front end over a SessionStore:
//   POST /sessions                      (admin token)
//   GET  /sessions/{id}/next?annotator=
//   POST /sessions/{id}/judgments
//   GET  /sessions/{id}/tally           (admin token)
class PrefServer {
 public:
  PrefServer(SessionStore& store, PrefServerOptions options);
  ~PrefServer();
  PrefServer(const PrefServer&) = delete;
  PrefServer& operator=(const PrefServer&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tear
