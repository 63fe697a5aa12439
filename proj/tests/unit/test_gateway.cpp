#include <doctest.h>

#include <fstream>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "tear/gateway.hpp"
#include "tear/mock.hpp"
#include "tear/providers.hpp"
#include "tear/util.hpp"
#include "test_support.hpp"

using namespace tear;
using namespace std::chrono_literals;

namespace {

CompletionRequest req(std::string prompt, std::string model = "m", std::string purpose = "translate") {
  return {std::move(model), std::move(prompt), Decoding{}, std::move(purpose)};
}

std::shared_ptr<MockProvider> echo() {
  return std::make_shared<MockProvider>([](const std::string& model, const std::string& p) { return model + ":" + p; });
}

}  // namespace

TEST_CASE("cache key covers model, prompt and decoding only") {
  auto a = req("hello");
  auto b = a;
  b.purpose = "estimate";
  CHECK(cache_key(a) == cache_key(b));
  CHECK(cache_key(a).size() == 64);
  b = a;
  b.model = "m2";
  CHECK(cache_key(a) != cache_key(b));
  b = a;
  b.decoding.temperature = 0.5;
  CHECK(cache_key(a) != cache_key(b));
  b = a;
  b.decoding.max_tokens = 10;
  CHECK(cache_key(a) != cache_key(b));
  b = a;
  b.prompt = "hello ";
  CHECK(cache_key(a) != cache_key(b));
}

TEST_CASE("mock mode fills the cache and repeats are cache hits") {
  Gateway gw(GatewayMode::mock);
  auto mock = echo();
  gw.set_mock(mock);
  const auto first = gw.complete(req("p"));
  CHECK(first.text == "m:p");
  CHECK(first.provenance == Provenance::mock);
  const auto second = gw.complete(req("p"));
  CHECK(second.text == "m:p");
  CHECK(second.provenance == Provenance::cache);
  CHECK(mock->calls() == 1);
  CHECK(gw.call_log().size() == 2);
  CHECK(gw.count_calls("translate") == 2);
}

TEST_CASE("replay mode never calls a provider") {
  auto store = std::make_shared<ResponseCache>();
  const auto r = req("known");
  store->put({cache_key(r), "m", "known", 0.0, 1024, "fixture", "2024-01-01T00:00:00Z"});
  Gateway gw(GatewayMode::replay);
  gw.set_replay_store(store);
  auto mock = echo();
  gw.add_provider("p", mock);
  gw.set_default_provider("p");
  CHECK(gw.complete(r).text == "fixture");
  CHECK(gw.complete(r).provenance == Provenance::replay);
  CHECK_THROWS_AS(gw.complete(req("unknown")), ReplayMiss);
  CHECK(mock->calls() == 0);
  const auto log = gw.call_log();
  CHECK_FALSE(log.back().ok);
}

TEST_CASE("decoding is validated") {
  Gateway gw(GatewayMode::mock);
  gw.set_mock(echo());
  auto r = req("x");
  r.decoding.temperature = -1;
  CHECK_THROWS_AS(gw.complete(r), ConfigError);
  r = req("x");
  r.decoding.max_tokens = 0;
  CHECK_THROWS_AS(gw.complete(r), ConfigError);
}

TEST_CASE("cache file persistence, export and import") {
  tear::testing::TempDir dir;
  {
    auto cache = std::make_shared<ResponseCache>(dir / "c.jsonl");
    Gateway gw(GatewayMode::mock, cache);
    gw.set_mock(echo());
    gw.complete(req("a"));
    gw.complete(req("b"));
  }
  ResponseCache reloaded(dir / "c.jsonl");
  CHECK(reloaded.size() == 2);
  CHECK(reloaded.get(cache_key(req("a"))) == std::string("m:a"));

  CHECK(reloaded.export_to(dir / "export.jsonl") == 2);
  ResponseCache fresh;
  CHECK(fresh.import_from(dir / "export.jsonl") == 2);
  std::vector<std::string> k1, k2;
  for (const auto& r : reloaded.records()) k1.push_back(r.key);
  for (const auto& r : fresh.records()) k2.push_back(r.key);
  CHECK(k1 == k2);
  CHECK(fresh.import_from(dir / "export.jsonl") == 0);

  ResponseCache empty;
  CHECK(empty.export_to(dir / "empty.jsonl") == 0);

  ResponseCache conflicting;
  conflicting.put({cache_key(req("a")), "m", "a", 0.0, 1024, "different", ""});
  try {
    conflicting.import_from(dir / "export.jsonl");
    FAIL("expected CacheConflict");
  } catch (const CacheConflict& e) {
    CHECK(e.keys() == std::vector<std::string>{cache_key(req("a"))});
  }
  CHECK(conflicting.size() == 1);
}

TEST_CASE("put never overwrites") {
  ResponseCache c;
  CHECK(c.put({"k", "m", "p", 0, 1, "v1", ""}));
  CHECK_FALSE(c.put({"k", "m", "p", 0, 1, "v2", ""}));
  CHECK(c.get("k") == std::string("v1"));
}

TEST_CASE("transient failures are retried with capped exponential backoff") {
  Gateway gw(GatewayMode::live);
  auto mock = echo();
  mock->fail_transiently(2);
  gw.add_provider("p", mock);
  gw.set_default_provider("p");
  std::vector<std::chrono::milliseconds> sleeps;
  gw.set_sleeper([&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  const auto r = gw.complete(req("x"));
  CHECK(r.text == "m:x");
  CHECK(r.attempt_count == 3);
  CHECK(sleeps == std::vector<std::chrono::milliseconds>{500ms, 1000ms});

  RetryPolicy p;
  CHECK(p.backoff_for(1) == 500ms);
  CHECK(p.backoff_for(3) == 2000ms);
  CHECK(p.backoff_for(10) == 8000ms);

  auto always = echo();
  always->fail_transiently(100);
  Gateway gw2(GatewayMode::live);
  gw2.add_provider("p", always);
  gw2.set_default_provider("p");
  gw2.set_sleeper([](std::chrono::milliseconds) {});
  CHECK_THROWS_AS(gw2.complete(req("x")), ProviderError);
  CHECK(always->calls() == 4);
}

TEST_CASE("permanent failures are not retried") {
  Gateway gw(GatewayMode::live);
  auto mock = echo();
  mock->fail_permanently_if([](const std::string& p) { return p == "bad"; });
  gw.add_provider("p", mock);
  gw.set_default_provider("p");
  gw.set_sleeper([](std::chrono::milliseconds) { FAIL("should not sleep"); });
  CHECK_THROWS_AS(gw.complete(req("bad")), ProviderError);
  CHECK(mock->calls() == 1);
  CHECK(gw.cache().size() == 0);
}

TEST_CASE("model routing") {
  Gateway gw(GatewayMode::live);
  auto a = std::make_shared<MockProvider>([](const std::string&, const std::string&) { return "A"; });
  auto b = std::make_shared<MockProvider>([](const std::string&, const std::string&) { return "B"; });
  gw.add_provider("a", a);
  gw.add_provider("b", b);
  gw.route_model("gpt", "a");
  gw.route_model("claude", "b");
  CHECK(gw.complete(req("x", "gpt")).text == "A");
  CHECK(gw.complete(req("x", "claude")).text == "B");
  // Unrouted models go to the first registered provider.
  CHECK(gw.complete(req("x", "gemini")).text == "A");
  Gateway empty(GatewayMode::live);
  CHECK_THROWS_AS(empty.complete(req("x", "gemini")), ConfigError);
}

TEST_CASE("batch keeps input order and reports errors per item") {
  Gateway gw(GatewayMode::mock);
  auto mock = echo();
  std::mt19937 rng(3);
  std::mutex mu;
  mock->set_delay([&](const std::string&) {
    std::lock_guard lock(mu);
    return std::chrono::milliseconds(rng() % 5);
  });
  mock->fail_permanently_if([](const std::string& p) { return p == "p7"; });
  gw.set_mock(mock);
  std::vector<CompletionRequest> reqs;
  for (int i = 0; i < 40; ++i) reqs.push_back(req("p" + std::to_string(i)));
  const auto out = gw.complete_batch(reqs, 8);
  REQUIRE(out.size() == 40);
  for (int i = 0; i < 40; ++i) {
    if (i == 7) {
      CHECK_FALSE(out[i].ok());
      CHECK(out[i].error);
      CHECK_FALSE(out[i].error_message.empty());
    } else {
      REQUIRE(out[i].ok());
      CHECK(out[i].response->text == "m:p" + std::to_string(i));
    }
  }
  CHECK(mock->max_in_flight() <= 8);
  CHECK_THROWS_AS(gw.complete_batch(reqs, 0), ConfigError);
}

TEST_CASE("status mapping") {
  CHECK_THROWS_AS(throw_for_status(401, "p", ""), AuthError);
  CHECK_THROWS_AS(throw_for_status(429, "p", ""), TransientProviderError);
  CHECK_THROWS_AS(throw_for_status(503, "p", ""), TransientProviderError);
  try {
    throw_for_status(400, "p", "nope");
  } catch (const TransientProviderError&) {
    FAIL("400 is not transient");
  } catch (const ProviderError& e) {
    CHECK(std::string(e.what()).find("400") != std::string::npos);
  }
}

TEST_CASE("http adapters against a local server") {
  httplib::Server server;
  std::string seen_auth, seen_model;
  server.Post("/v1/chat/completions", [&](const httplib::Request& rq, httplib::Response& rs) {
    seen_auth = rq.get_header_value("Authorization");
    auto j = nlohmann::json::parse(rq.body);
    seen_model = j["model"];
    const std::string content = j["messages"][0]["content"];
    if (content == "limit") {
      rs.status = 429;
      return;
    }
    rs.set_content(nlohmann::json{{"choices", {{{"message", {{"content", "echo " + content}}}}}}}.dump(),
                   "application/json");
  });
  server.Post("/messages", [&](const httplib::Request& rq, httplib::Response& rs) {
    auto j = nlohmann::json::parse(rq.body);
    rs.set_content(nlohmann::json{{"content", {{{"type", "text"}, {"text", j["model"].get<std::string>()}}}}}.dump(),
                   "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  ::setenv("TEAR_TEST_KEY", "secret", 1);
  OpenAICompatibleProvider openai({"oa", base + "/v1/", "TEAR_TEST_KEY", 10s});
  CHECK(openai.send("gpt-x", "hi", Decoding{}) == "echo hi");
  CHECK(seen_auth == "Bearer secret");
  CHECK(seen_model == "gpt-x");
  CHECK_THROWS_AS(openai.send("gpt-x", "limit", Decoding{}), TransientProviderError);

  AnthropicProvider claude({"an", base, "", 10s});
  CHECK(claude.send("claude-2", "hi", Decoding{}) == "claude-2");

  OpenAICompatibleProvider nokey({"oa", base + "/v1", "TEAR_TEST_UNSET_KEY", 10s});
  CHECK_THROWS_AS(nokey.send("m", "hi", Decoding{}), AuthError);

  server.stop();
  t.join();
}

TEST_CASE("gateway config file") {
  tear::testing::TempDir dir;
  std::ofstream(dir / "gw.json") << R"({"providers": {"oa": {"base_url": "http://127.0.0.1:1/v1"}},
                                       "models": {"gpt-3.5-turbo": "oa"}, "retry": {"max_attempts": 1}})";
  auto gw = Gateway::from_config(dir / "gw.json", std::make_shared<ResponseCache>());
  CHECK(gw->mode() == GatewayMode::live);
  CHECK_THROWS_AS(gw->complete(req("x", "gpt-3.5-turbo")), ProviderError);
  std::ofstream(dir / "bad.json") << R"({"providers": {"x": {"base_url": "http://h", "kind": "carrier-pigeon"}}})";
  CHECK_THROWS_AS(Gateway::from_config(dir / "bad.json", nullptr), ConfigError);
}

TEST_CASE("scripted mock answers by role") {
  ScriptedMock s = ScriptedMock::parse(R"({"translations": {"源": "Draft"},
                                            "estimates": {"Draft": "critical: no-error\nmajor: accuracy/omission - \"x\"\nminor: no-error"},
                                            "refinements": {"Draft": "Better"}})");
  CHECK(ScriptedMock::parse(s.to_json()).translations == s.translations);
}
