#include "tear/bridge.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <set>
#include <thread>

#include <json.hpp>

#include "tear/errors.hpp"
#include "tear/core.hpp"
#include "tear/util.hpp"

extern char** environ;

namespace tear {

using nlohmann::json;

std::string to_string(NeuralMetric m) {
  switch (m) {
    case NeuralMetric::comet22: return "comet22";
    case NeuralMetric::cometkiwi: return "cometkiwi";
    case NeuralMetric::bleurt20: return "bleurt20";
  }
  return "comet22";
}

NeuralMetric parse_neural_metric(std::string_view s) {
  if (s == "comet22") return NeuralMetric::comet22;
  if (s == "cometkiwi") return NeuralMetric::cometkiwi;
  if (s == "bleurt20") return NeuralMetric::bleurt20;
  throw ConfigError("unknown neural metric '" + std::string(s) + "' (comet22, cometkiwi, bleurt20)");
}

bool needs_reference(NeuralMetric m) { return m != NeuralMetric::cometkiwi; }

// ---------------------------------------------------------------- subprocess

SubprocessTransport::SubprocessTransport(std::vector<std::string> argv) : argv_(std::move(argv)) {
  if (argv_.empty()) throw ConfigError("scorer command is empty");
}

SubprocessTransport::~SubprocessTransport() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    // Closing stdin is the shutdown signal; give the child a moment, then kill it.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }
}

void SubprocessTransport::start() {
  int in_pipe[2], out_pipe[2];
  if (::pipe(in_pipe) != 0) throw BridgeUnavailable(std::string("pipe: ") + std::strerror(errno));
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw BridgeUnavailable(std::string("pipe: ") + std::strerror(errno));
  }
  ::fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, in_pipe[0]);
  posix_spawn_file_actions_addclose(&actions, out_pipe[1]);

  std::vector<char*> args;
  for (auto& a : argv_) args.push_back(a.data());
  args.push_back(nullptr);
  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    throw BridgeUnavailable("cannot start scorer '" + argv_[0] + "': " + std::strerror(rc));
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

std::optional<std::string> SubprocessTransport::read_line() {
  while (true) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return std::nullopt;
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::string SubprocessTransport::handshake() {
  if (handshake_) return *handshake_;
  if (pid_ < 0) start();
  auto line = read_line();
  if (!line) throw BridgeUnavailable("scorer '" + argv_[0] + "' exited before its handshake");
  handshake_ = *line;
  return *handshake_;
}

std::vector<std::string> SubprocessTransport::exchange(const std::vector<std::string>& request_lines) {
  handshake();
  std::string payload;
  for (const auto& l : request_lines) payload += l + "\n";
  bool write_failed = false;
  std::thread writer([&] {
    // EPIPE instead of a process-wide SIGPIPE if the child dies.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGPIPE);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    std::size_t off = 0;
    while (off < payload.size()) {
      const ssize_t n = ::write(to_child_, payload.data() + off, payload.size() - off);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        write_failed = true;
        return;
      }
      off += static_cast<std::size_t>(n);
    }
  });
  std::vector<std::string> out;
  out.reserve(request_lines.size());
  while (out.size() < request_lines.size()) {
    auto line = read_line();
    if (!line) break;
    if (trim(*line).empty()) continue;
    out.push_back(std::move(*line));
  }
  writer.join();
  if (out.size() < request_lines.size())
    throw BridgeUnavailable("scorer stopped after " + std::to_string(out.size()) + " of " +
                            std::to_string(request_lines.size()) + " responses" +
                            (write_failed ? " (write failed)" : ""));
  return out;
}

// ---------------------------------------------------------------- in-process

FunctionTransport::FunctionTransport(std::string handshake_line, Handler handler)
    : handshake_(std::move(handshake_line)), handler_(std::move(handler)) {}

std::vector<std::string> FunctionTransport::exchange(const std::vector<std::string>& request_lines) {
  std::vector<std::string> out;
  for (const auto& l : request_lines) out.push_back(handler_(l));
  std::reverse(out.begin(), out.end());
  return out;
}

std::string StubScorer::handshake_line() const {
  json names = json::array();
  for (auto m : metrics) names.push_back(to_string(m));
  return json{{"protocol_version", kBridgeProtocolVersion}, {"metrics_available", names}, {"models", "stub"}}.dump();
}

std::string StubScorer::handle(const std::string& request_line) const {
  json req;
  try {
    req = json::parse(request_line);
  } catch (const json::exception&) {
    return json{{"id", nullptr}, {"error", "malformed request"}}.dump();
  }
  if (!req.is_object() || !req.contains("id")) return json{{"id", nullptr}, {"error", "missing id"}}.dump();
  const json id = req["id"];
  auto error = [&](const std::string& msg) { return json{{"id", id}, {"error", msg}}.dump(); };
  if (!req.contains("metric") || !req["metric"].is_string()) return error("missing metric");
  if (!req.contains("candidate") || !req["candidate"].is_string()) return error("missing candidate");
  NeuralMetric metric;
  try {
    metric = parse_neural_metric(req["metric"].get<std::string>());
  } catch (const ConfigError&) {
    return error("unknown metric");
  }
  if (std::find(metrics.begin(), metrics.end(), metric) == metrics.end()) return error("metric not loaded");
  if (needs_reference(metric) && (!req.contains("reference") || !req["reference"].is_string()))
    return error("reference required for " + to_string(metric));
  if (!needs_reference(metric) && (!req.contains("source") || !req["source"].is_string()))
    return error("source required for " + to_string(metric));
  double score = constant;
  if (auto it = table.find(sha256_hex(req["candidate"].get<std::string>())); it != table.end()) score = it->second;
  return json{{"id", id}, {"score", score}}.dump();
}

std::shared_ptr<FunctionTransport> StubScorer::transport() const {
  return std::make_shared<FunctionTransport>(handshake_line(),
                                             [stub = *this](const std::string& line) { return stub.handle(line); });
}

// ---------------------------------------------------------------- client

ScorerBridge::ScorerBridge(std::shared_ptr<ScorerTransport> transport) : transport_(std::move(transport)) {
  if (!transport_) throw BridgeUnavailable("no scorer transport configured");
}

const BridgeHandshake& ScorerBridge::handshake() {
  if (handshake_) return *handshake_;
  BridgeHandshake h;
  h.raw = transport_->handshake();
  try {
    json j = json::parse(h.raw);
    h.protocol_version = j.at("protocol_version").get<int>();
    for (const auto& m : j.at("metrics_available")) h.metrics_available.push_back(m.get<std::string>());
  } catch (const json::exception&) {
    throw ProtocolError("bad handshake record: " + h.raw);
  }
  if (h.protocol_version != kBridgeProtocolVersion)
    throw ProtocolError("scorer speaks protocol " + std::to_string(h.protocol_version) + ", expected " +
                        std::to_string(kBridgeProtocolVersion));
  handshake_ = std::move(h);
  return *handshake_;
}

namespace {

std::string item_key(NeuralMetric metric, const ScoreItem& item) {
  auto opt = [](const std::optional<std::string>& s) { return s ? "1" + *s : std::string("0"); };
  return sha256_hex(canonical_encode({to_string(metric), opt(item.source), item.candidate, opt(item.reference)}));
}

}  // namespace

std::vector<double> ScorerBridge::score(NeuralMetric metric, const std::vector<ScoreItem>& items) {
  std::lock_guard lock(mu_);
  // Pre-flight: nothing goes over the wire if any item is incomplete.
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (needs_reference(metric) && !items[i].reference)
      throw ProtocolError("item " + std::to_string(i) + ": " + to_string(metric) + " needs a reference");
    if (!needs_reference(metric) && !items[i].source)
      throw ProtocolError("item " + std::to_string(i) + ": " + to_string(metric) + " needs a source");
  }

  std::vector<double> out(items.size());
  std::vector<std::string> lines;
  std::map<std::string, std::vector<std::size_t>> waiting;  // request id -> item indices
  std::map<std::string, std::string> pending_keys;          // cache key -> request id
  std::map<std::string, std::string> id_to_key;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string key = item_key(metric, items[i]);
    if (auto it = cache_.find(key); it != cache_.end()) {
      out[i] = it->second;
      ++cache_hits_;
      continue;
    }
    if (auto it = pending_keys.find(key); it != pending_keys.end()) {
      waiting[it->second].push_back(i);
      continue;
    }
    const std::string id = "r" + std::to_string(next_id_++);
    json req = {{"id", id}, {"metric", to_string(metric)}, {"candidate", items[i].candidate}};
    if (items[i].source) req["source"] = *items[i].source;
    if (items[i].reference) req["reference"] = *items[i].reference;
    lines.push_back(req.dump());
    waiting[id].push_back(i);
    pending_keys[key] = id;
    id_to_key[id] = key;
  }
  if (lines.empty()) return out;

  const auto& hs = handshake();
  if (std::find(hs.metrics_available.begin(), hs.metrics_available.end(), to_string(metric)) ==
      hs.metrics_available.end())
    throw ProtocolError("scorer does not offer " + to_string(metric));

  requests_sent_ += lines.size();
  const auto responses = transport_->exchange(lines);
  std::set<std::string> seen;
  for (const auto& line : responses) {
    json r;
    try {
      r = json::parse(line);
    } catch (const json::exception&) {
      throw ProtocolError("unparseable response record: " + line);
    }
    if (!r.is_object() || !r.contains("id") || !r["id"].is_string())
      throw ProtocolError("response record without a valid id: " + line);
    const std::string id = r["id"].get<std::string>();
    auto w = waiting.find(id);
    if (w == waiting.end() || !seen.insert(id).second)
      throw ProtocolError("unexpected or duplicate response id: " + line);
    if (r.contains("error")) throw ProtocolError("scorer error for record " + id + ": " + r["error"].dump());
    if (!r.contains("score") || !r["score"].is_number())
      throw ProtocolError("response record without a score: " + line);
    const double s = r["score"].get<double>();
    for (std::size_t i : w->second) out[i] = s;
    cache_[id_to_key[id]] = s;
  }
  if (seen.size() != waiting.size()) throw ProtocolError("scorer answered " + std::to_string(seen.size()) + " of " +
                                                         std::to_string(waiting.size()) + " requests");
  return out;
}

}  // namespace tear
