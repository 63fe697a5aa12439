#include <doctest.h>

#include <fstream>
#include <random>

#include <httplib.h>
#include <json.hpp>

#include "tear/errors.hpp"
#include "tear/pref.hpp"
#include "tear/util.hpp"
#include "test_support.hpp"

using namespace tear;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Texts carry a neutral tag (hash of the system name) so the simulated
// annotator can apply its ground truth without seeing system names.
std::string tag(const std::string& system) { return sha256_hex(system).substr(0, 8); }

CandidateSet candidates(const std::string& system, std::size_t n) {
  CandidateSet c;
  c.system = system;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "s" + std::to_string(i);
    c.sources[id] = "src-" + std::to_string(i);
    c.texts[id] = tag(system) + " translation " + std::to_string(i);
  }
  return c;
}

// Ground truth for the simulated annotator, by segment number:
// 0 -> first system better, 1 -> second better, 2 -> tie.
int truth(const std::string& source) { return std::stoi(source.substr(4)) % 3; }

std::string choose(const PreferenceTask& t, const std::string& first, const std::string& second) {
  const int g = truth(t.source_text);
  if (g == 2) return "tie";
  const std::string winner = g == 0 ? first : second;
  return t.candidate_a.rfind(tag(winner), 0) == 0 ? "A" : "B";
}

json inline_set(const CandidateSet& c) {
  json items = json::array();
  for (const auto& [id, text] : c.texts) items.push_back({{"id", id}, {"source", c.sources.at(id)}, {"text", text}});
  return {{"system", c.system}, {"items", items}};
}

}  // namespace

TEST_CASE("session creation checks the candidate sets") {
  tear::testing::TempDir dir;
  SessionStore store(dir.path());
  CHECK_THROWS_AS(store.create_session(candidates("a", 3), candidates("a", 3), {}), ValidationError);
  CHECK_THROWS_AS(store.create_session(candidates("a", 3), candidates("b", 4), {}), SegmentMismatch);
  const auto info = store.create_session(candidates("a", 5), candidates("b", 5), {7, {"ann1"}, false});
  CHECK(info.task_count == 5);
  CHECK(fs::exists(dir / info.id / "session.json"));
  const auto again = store.create_session(candidates("a", 5), candidates("b", 5), {7, {"ann1"}, false});
  CHECK(again.id != info.id);
}

TEST_CASE("sides are randomized but recoverable") {
  tear::testing::TempDir dir;
  SessionStore store(dir.path());
  const auto info = store.create_session(candidates("zero", 40), candidates("few", 40), {3, {"ann1"}, false});
  const auto sides = store.side_map(info.id);
  std::size_t zero_first = 0;
  for (const auto& [pair, sys] : sides) {
    CHECK((sys == "zero" || sys == "few"));
    zero_first += sys == "zero";
  }
  CHECK(zero_first > 5);
  CHECK(zero_first < 35);
  const auto same = store.create_session(candidates("zero", 40), candidates("few", 40), {3, {"ann1"}, false});
  CHECK(store.side_map(same.id) == sides);
  const auto other = store.create_session(candidates("zero", 40), candidates("few", 40), {4, {"ann1"}, false});
  CHECK(store.side_map(other.id) != sides);
}

TEST_CASE("a simulated annotator through the store") {
  tear::testing::TempDir dir;
  SessionStore store(dir.path());
  const auto info = store.create_session(candidates("zero", 21), candidates("few", 21), {11, {"ann1", "ann2"}, false});
  std::size_t count = 0;
  for (;;) {
    const auto next = store.next_task(info.id, "ann1");
    if (next.done()) break;
    CHECK(next.progress.judged == count);
    CHECK(next.progress.total == 21);
    const auto& t = *next.task;
    store.submit(info.id, {t.pair_id, parse_choice(choose(t, "zero", "few")), "ann1", ""});
    ++count;
  }
  CHECK(count == 21);
  const auto tally = store.tally(info.id);
  CHECK(tally.first_wins == 7);
  CHECK(tally.second_wins == 7);
  CHECK(tally.ties == 7);
  CHECK(store.judgments(info.id).front().timestamp.size() >= 20);

  const auto first = store.next_task(info.id, "ann2");
  REQUIRE_FALSE(first.done());
  CHECK_THROWS_AS(store.submit(info.id, {first.task->pair_id, Choice::A, "ann1", ""}), DuplicateJudgment);
  CHECK_THROWS_AS(store.submit(info.id, {"nope", Choice::A, "ann2", ""}), UnknownTask);
  CHECK_THROWS_AS(store.next_task(info.id, "stranger"), UnknownAnnotator);
  CHECK_THROWS_AS(store.next_task("does-not-exist", "ann1"), UnknownSession);
  CHECK_THROWS_AS(store.next_task("../etc", "ann1"), UnknownSession);
}

TEST_CASE("judgments survive a restart and a torn last line") {
  tear::testing::TempDir dir;
  std::string id;
  {
    SessionStore store(dir.path());
    id = store.create_session(candidates("x", 4), candidates("y", 4), {1, {}, true}).id;
    for (int i = 0; i < 3; ++i) {
      const auto t = *store.next_task(id, "late-joiner").task;
      store.submit(id, {t.pair_id, Choice::tie, "late-joiner", "2024-03-01T00:00:00Z"});
    }
  }
  std::ofstream(dir / id / "judgments.jsonl", std::ios::app) << R"({"pair_id": "p0)";
  SessionStore reopened(dir.path());
  CHECK(reopened.tally(id).ties == 3);
  CHECK(reopened.next_task(id, "late-joiner").progress.judged == 3);
}

TEST_CASE("each annotator gets a stable order") {
  tear::testing::TempDir dir;
  SessionStore store(dir.path());
  const auto id = store.create_session(candidates("x", 10), candidates("y", 10), {5, {"a", "b"}, false}).id;
  const auto a1 = store.next_task(id, "a").task->pair_id;
  CHECK(store.next_task(id, "a").task->pair_id == a1);
}

TEST_CASE("HTTP flow with a headless annotator") {
  tear::testing::TempDir dir;
  SessionStore store(dir.path());
  PrefServer server(store, {"127.0.0.1", 0, "s3cret", "*"});
  const int port = server.start();
  httplib::Client client("127.0.0.1", port);
  const httplib::Headers admin{{"X-Admin-Token", "s3cret"}};

  const auto first = candidates("zero-shot", 20), second = candidates("few-shot", 20);
  json create = {{"first", inline_set(first)}, {"second", inline_set(second)}, {"seed", 4}, {"roster", {"ann1"}}};
  auto denied = client.Post("/sessions", create.dump(), "application/json");
  REQUIRE(denied);
  CHECK(denied->status == 403);

  auto created = client.Post("/sessions", admin, create.dump(), "application/json");
  REQUIRE(created);
  REQUIRE(created->status == 201);
  const std::string sid = json::parse(created->body)["session_id"];
  CHECK(json::parse(created->body)["task_count"] == 20);

  std::size_t done = 0;
  std::string first_pair;
  for (;;) {
    auto res = client.Get("/sessions/" + sid + "/next?annotator=ann1");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    CHECK(res->body.find("zero-shot") == std::string::npos);
    CHECK(res->body.find("few-shot") == std::string::npos);
    CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
    const json j = json::parse(res->body);
    if (j["done"].get<bool>()) break;
    const json& t = j["task"];
    CHECK(j["progress"]["judged"] == done);
    PreferenceTask task{t["pair_id"], t["source_text"], t["candidate_a"], t["candidate_b"]};
    if (first_pair.empty()) first_pair = task.pair_id;
    json judgment = {{"pair_id", task.pair_id}, {"choice", choose(task, "zero-shot", "few-shot")}, {"annotator_id", "ann1"}};
    auto sub = client.Post("/sessions/" + sid + "/judgments", judgment.dump(), "application/json");
    REQUIRE(sub);
    CHECK(sub->status == 200);
    CHECK(sub->body.find("zero-shot") == std::string::npos);
    ++done;
  }
  CHECK(done == 20);

  json dup = {{"pair_id", first_pair}, {"choice", "A"}, {"annotator_id", "ann1"}};
  auto dup_res = client.Post("/sessions/" + sid + "/judgments", dup.dump(), "application/json");
  REQUIRE(dup_res);
  CHECK(dup_res->status == 409);
  CHECK(json::parse(dup_res->body)["error"] == "DuplicateJudgment");

  CHECK(client.Get("/sessions/" + sid + "/tally")->status == 403);
  auto tally = client.Get("/sessions/" + sid + "/tally", admin);
  REQUIRE(tally);
  const json tj = json::parse(tally->body);
  // Segments 0..19: 7 first, 7 second, 6 ties.
  CHECK(tj["first_wins"] == 7);
  CHECK(tj["second_wins"] == 7);
  CHECK(tj["ties"] == 6);

  CHECK(client.Get("/sessions/nope/next?annotator=ann1")->status == 404);
  CHECK(client.Get("/sessions/" + sid + "/next")->status == 400);
  CHECK(client.Get("/sessions/" + sid + "/next?annotator=intruder")->status == 403);
  CHECK(client.Post("/sessions/" + sid + "/judgments", "{bad json", "application/json")->status == 400);
  json bad_choice = {{"pair_id", first_pair}, {"choice", "both"}, {"annotator_id", "ann1"}};
  CHECK(client.Post("/sessions/" + sid + "/judgments", bad_choice.dump(), "application/json")->status == 422);
  json mismatch = {{"first", inline_set(first)}, {"second", inline_set(candidates("other", 3))}};
  CHECK(client.Post("/sessions", admin, mismatch.dump(), "application/json")->status == 422);
  CHECK(client.Options("/sessions")->status == 204);

  server.stop();
}
