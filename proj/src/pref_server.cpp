#include <httplib.h>

#include <thread>

#include "tear/errors.hpp"
#include "tear/json_io.hpp"
#include "tear/pref.hpp"

namespace tear {

namespace {

int status_for(const Error& e) {
  const std::string& k = e.kind();
  if (k == "UnknownSession" || k == "UnknownTask") return 404;
  if (k == "DuplicateJudgment") return 409;
  if (k == "UnknownAnnotator") return 403;
  if (k == "SegmentMismatch" || k == "ValidationError" || k == "ConfigError") return 422;
  return 500;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
  send_json(res, status, {{"error", kind}, {"message", message}});
}

json progress_json(const Progress& p) { return {{"judged", p.judged}, {"total", p.total}}; }

// Inline form {"system": ..., "items": [{"id", "source", "text"}]}, or
// {"archive": path} naming a run archive directory.
CandidateSet candidates_from(const json& j) {
  if (j.contains("archive")) return CandidateSet::from_archive(load_run(j.at("archive").get<std::string>()));
  CandidateSet c;
  c.system = j.at("system").get<std::string>();
  for (const auto& item : j.at("items")) {
    const std::string id = item.at("id").get<std::string>();
    c.sources[id] = item.at("source").get<std::string>();
    c.texts[id] = item.at("text").get<std::string>();
  }
  return c;
}

}  // namespace

struct PrefServer::Impl {
  SessionStore& store;
  PrefServerOptions options;
  httplib::Server server;
  std::thread thread;
  int port = 0;

  Impl(SessionStore& s, PrefServerOptions o) : store(s), options(std::move(o)) { install(); }

  bool admin_ok(const httplib::Request& req) const {
    return !options.admin_token.empty() && req.get_header_value("X-Admin-Token") == options.admin_token;
  }

  template <typename F>
  void guarded(httplib::Response& res, F&& body) {
    try {
      body();
    } catch (const Error& e) {
      send_error(res, status_for(e), e.kind(), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "BadRequest", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "InternalError", e.what());
    }
  }

  void install() {
    server.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                {"Access-Control-Allow-Headers", "Content-Type, X-Admin-Token"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      if (!admin_ok(req)) return send_error(res, 403, "Forbidden", "admin token required");
      guarded(res, [&] {
        const json body = json::parse(req.body);
        SessionOptions opts;
        opts.seed = body.value("seed", std::int64_t{1});
        opts.roster = body.value("roster", std::vector<std::string>{});
        opts.lazy_roster = body.value("lazy_roster", false);
        const auto info = store.create_session(candidates_from(body.at("first")), candidates_from(body.at("second")),
                                               opts);
        send_json(res, 201, {{"session_id", info.id}, {"task_count", info.task_count}});
      });
    });

    server.Get(R"(/sessions/([^/]+)/next)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        if (!req.has_param("annotator")) return send_error(res, 400, "BadRequest", "annotator parameter required");
        const auto next = store.next_task(req.matches[1], req.get_param_value("annotator"));
        json body = {{"done", next.done()}, {"progress", progress_json(next.progress)}};
        if (next.task)
          body["task"] = {{"pair_id", next.task->pair_id},
                          {"source_text", next.task->source_text},
                          {"candidate_a", next.task->candidate_a},
                          {"candidate_b", next.task->candidate_b}};
        send_json(res, 200, body);
      });
    });

    server.Post(R"(/sessions/([^/]+)/judgments)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = json::parse(req.body);
        PreferenceJudgment j;
        j.pair_id = body.at("pair_id").get<std::string>();
        j.choice = parse_choice(body.at("choice").get<std::string>());
        j.annotator_id = body.at("annotator_id").get<std::string>();
        j.timestamp = body.value("timestamp", "");
        const auto p = store.submit(req.matches[1], j);
        send_json(res, 200, {{"ok", true}, {"progress", progress_json(p)}});
      });
    });

    server.Get(R"(/sessions/([^/]+)/tally)", [this](const httplib::Request& req, httplib::Response& res) {
      if (!admin_ok(req)) return send_error(res, 403, "Forbidden", "admin token required");
      guarded(res, [&] {
        const auto t = store.tally(req.matches[1]);
        send_json(res, 200,
                  {{"first_wins", t.first_wins}, {"ties", t.ties}, {"second_wins", t.second_wins},
                   {"judgments", t.judgments}});
      });
    });
  }

  void bind() {
    if (options.port == 0) {
      port = server.bind_to_any_port(options.host);
    } else {
      if (!server.bind_to_port(options.host, options.port))
        throw ConfigError("cannot bind " + options.host + ":" + std::to_string(options.port));
      port = options.port;
    }
    if (port <= 0) throw ConfigError("cannot bind " + options.host);
  }
};

PrefServer::PrefServer(SessionStore& store, PrefServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {}

PrefServer::~PrefServer() { stop(); }

int PrefServer::start() {
  impl_->bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void PrefServer::run() {
  impl_->bind();
  impl_->server.listen_after_bind();
}

void PrefServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int PrefServer::port() const { return impl_->port; }

}  // namespace tear
