#include <doctest.h>

#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

#include "tear/bridge.hpp"
#include "tear/errors.hpp"
#include "tear/util.hpp"
#include "test_support.hpp"

using namespace tear;
using nlohmann::json;

namespace {

std::vector<ScoreItem> items(std::size_t n, bool with_ref = true) {
  std::vector<ScoreItem> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({"src" + std::to_string(i), "cand" + std::to_string(i),
                   with_ref ? std::optional<std::string>("ref" + std::to_string(i)) : std::nullopt});
  return out;
}

}  // namespace

TEST_CASE("metric names") {
  CHECK(parse_neural_metric("comet22") == NeuralMetric::comet22);
  CHECK(parse_neural_metric("bleurt20") == NeuralMetric::bleurt20);
  CHECK_THROWS_AS(parse_neural_metric("chrf"), ConfigError);
  CHECK_FALSE(needs_reference(NeuralMetric::cometkiwi));
  CHECK(needs_reference(NeuralMetric::comet22));
}

TEST_CASE("in-process stub: scores come back in item order") {
  StubScorer stub;
  stub.constant = 0.25;
  stub.table[sha256_hex("cand3")] = 0.9;
  ScorerBridge bridge(stub.transport());
  CHECK(bridge.handshake().protocol_version == kBridgeProtocolVersion);
  const auto s = bridge.score(NeuralMetric::comet22, items(6));
  REQUIRE(s.size() == 6);
  CHECK(s[3] == 0.9);
  CHECK(s[0] == 0.25);
  CHECK(s[5] == 0.25);
}

TEST_CASE("duplicates are sent once and repeats hit the cache") {
  StubScorer stub;
  ScorerBridge bridge(stub.transport());
  auto batch = items(3);
  batch.push_back(batch[0]);
  bridge.score(NeuralMetric::comet22, batch);
  CHECK(bridge.requests_sent() == 3);
  bridge.score(NeuralMetric::comet22, items(3));
  CHECK(bridge.requests_sent() == 3);
  CHECK(bridge.cache_hits() == 3);
  bridge.score(NeuralMetric::bleurt20, items(3));  // the metric is part of the key
  CHECK(bridge.requests_sent() == 6);
}

TEST_CASE("missing fields fail before anything is sent") {
  StubScorer stub;
  ScorerBridge bridge(stub.transport());
  CHECK_THROWS_AS(bridge.score(NeuralMetric::comet22, items(3, false)), ProtocolError);
  CHECK(bridge.requests_sent() == 0);
  auto no_src = items(2);
  no_src[1].source.reset();
  CHECK_THROWS_AS(bridge.score(NeuralMetric::cometkiwi, no_src), ProtocolError);
  CHECK_NOTHROW(bridge.score(NeuralMetric::cometkiwi, items(2, false)));
}

TEST_CASE("error records and bad handshakes surface as protocol errors") {
  StubScorer stub;
  stub.metrics = {NeuralMetric::cometkiwi};
  ScorerBridge bridge(stub.transport());
  CHECK_THROWS_AS(bridge.score(NeuralMetric::comet22, items(1)), ProtocolError);

  auto wrong_version = std::make_shared<FunctionTransport>(R"({"protocol_version": 99, "metrics_available": []})",
                                                           [](const std::string&) { return std::string("{}"); });
  ScorerBridge b2(wrong_version);
  CHECK_THROWS_AS(b2.handshake(), ProtocolError);

  auto erroring = std::make_shared<FunctionTransport>(StubScorer().handshake_line(), [](const std::string& line) {
    return json{{"id", json::parse(line)["id"]}, {"error", "model crashed"}}.dump();
  });
  ScorerBridge b3(erroring);
  try {
    b3.score(NeuralMetric::comet22, items(1));
    FAIL("expected ProtocolError");
  } catch (const ProtocolError& e) {
    CHECK(std::string(e.what()).find("r0") != std::string::npos);
  }

  auto wrong_id = std::make_shared<FunctionTransport>(StubScorer().handshake_line(), [](const std::string&) {
    return std::string(R"({"id": "zzz", "score": 0.1})");
  });
  ScorerBridge b4(wrong_id);
  CHECK_THROWS_AS(b4.score(NeuralMetric::comet22, items(1)), ProtocolError);
  CHECK_THROWS_AS(ScorerBridge(nullptr), BridgeUnavailable);
}

TEST_CASE("subprocess stub answers a mixed batch with a bijective id mapping") {
  SubprocessTransport transport({TEAR_SCORER_STUB, "--constant", "0.4"});
  const json hs = json::parse(transport.handshake());
  CHECK(hs["protocol_version"] == kBridgeProtocolVersion);

  std::mt19937 rng(9);
  const char* metrics[] = {"comet22", "cometkiwi", "bleurt20"};
  std::vector<std::string> lines;
  std::set<std::string> expect_error;
  for (int i = 0; i < 100; ++i) {
    const std::string metric = metrics[rng() % 3];
    json req = {{"id", "q" + std::to_string(i)}, {"metric", metric}, {"candidate", "c" + std::to_string(i)}};
    const bool src = rng() % 4 != 0, ref = rng() % 4 != 0;
    if (src) req["source"] = "s";
    if (ref) req["reference"] = "r";
    const bool ok = metric == "cometkiwi" ? src : ref;
    if (!ok) expect_error.insert(req["id"]);
    lines.push_back(req.dump());
  }
  const auto out = transport.exchange(lines);
  REQUIRE(out.size() == 100);
  std::multiset<std::string> ids;
  std::set<std::string> got_error;
  for (const auto& l : out) {
    const json r = json::parse(l);
    ids.insert(r["id"].get<std::string>());
    if (r.contains("error")) {
      got_error.insert(r["id"].get<std::string>());
      CHECK(r["error"].get<std::string>().find("required") != std::string::npos);
    } else {
      CHECK(r["score"] == 0.4);
    }
  }
  std::multiset<std::string> sent;
  for (int i = 0; i < 100; ++i) sent.insert("q" + std::to_string(i));
  CHECK(ids == sent);
  CHECK(got_error == expect_error);
}

TEST_CASE("subprocess bridge end to end") {
  tear::testing::TempDir dir;
  std::ofstream(dir / "table.tsv") << sha256_hex("cand1") << "\t0.77\n";
  auto transport = std::make_shared<SubprocessTransport>(
      std::vector<std::string>{TEAR_SCORER_STUB, "--table", (dir / "table.tsv").string()});
  ScorerBridge bridge(transport);
  const auto s = bridge.score(NeuralMetric::bleurt20, items(3));
  CHECK(s == std::vector<double>{0.5, 0.77, 0.5});
}

TEST_CASE("scorer that dies or never starts") {
  auto dying = std::make_shared<SubprocessTransport>(std::vector<std::string>{TEAR_SCORER_STUB, "--die-after", "2"});
  ScorerBridge bridge(dying);
  CHECK_THROWS_AS(bridge.score(NeuralMetric::comet22, items(5)), BridgeUnavailable);

  auto missing = std::make_shared<SubprocessTransport>(std::vector<std::string>{"/nonexistent/scorer"});
  CHECK_THROWS_AS(missing->handshake(), BridgeUnavailable);
  CHECK_THROWS_AS(SubprocessTransport({}), ConfigError);
}
