#include <doctest.h>

#include "tear/errors.hpp"
#include "tear/mock.hpp"
#include "tear/orchestrator.hpp"

using namespace tear;

namespace {

const LanguagePair kZhEn = LanguagePair::parse("zh-en");
const std::string kClean = "critical: no-error\nmajor: no-error\nminor: no-error";
const std::string kMajor = "critical: no-error\nmajor: accuracy/omission - \"x\"\nminor: no-error";
const std::string kMinor = "critical: no-error\nmajor: no-error\nminor: style/awkward - \"y\"";

Segment seg(std::string id, std::string src) { return {std::move(id), kZhEn, std::move(src), std::nullopt, std::nullopt}; }

RunConfig config() {
  RunConfig c;
  c.translate_model = c.estimate_model = c.refine_model = "gpt-3.5-turbo";
  // Zero-shot translation and exemplar-free refinement: no exemplar set needed.
  c.translate_shots = 0;
  c.refine_variant = RefineVariant::alpha;
  return c;
}

struct Harness {
  ScriptedMock script;
  Gateway gateway{GatewayMode::mock};

  Harness& with(std::shared_ptr<MockProvider> p) {
    gateway.set_mock(std::move(p));
    return *this;
  }
  Harness& arm() {
    gateway.set_mock(script.provider());
    return *this;
  }
};

}  // namespace

TEST_CASE("clean estimate closes the gate with zero refine calls") {
  Harness h;
  h.script.translations["源"] = "T1";
  h.script.estimates["T1"] = kClean;
  h.arm();
  const auto r = Orchestrator(h.gateway).run_tear(seg("1", "源"), config(), std::nullopt);
  CHECK(r.outcome == Outcome::not_flagged);
  CHECK(r.final_text == "T1");
  CHECK(r.refined.empty());
  CHECK(r.estimations.size() == 1);
  CHECK(h.gateway.count_calls("refine") == 0);
  CHECK(r.initial.stage == DraftStage::initial);
  CHECK(r.initial.prompt_kind == "translate_zero");
}

TEST_CASE("flagged and modified") {
  Harness h;
  h.script.translations["源"] = "T1";
  h.script.estimates["T1"] = kMajor;
  h.script.refinements["T1"] = "T2";
  h.arm();
  const auto r = Orchestrator(h.gateway).run_tear(seg("1", "源"), config(), std::nullopt);
  CHECK(r.outcome == Outcome::flagged_modified);
  CHECK(r.final_text == "T2");
  REQUIRE(r.refined.size() == 1);
  CHECK(r.refined[0].iteration == 1);
  CHECK(r.refined[0].prompt_kind == "refine_alpha");
  CHECK(h.gateway.count_calls("refine") == 1);
}

TEST_CASE("refine that echoes the draft is flagged_unmodified") {
  Harness h;
  h.script.translations["源"] = "T1";
  h.script.estimates["T1"] = kMajor;
  h.script.refinements["T1"] = "  T1 ";
  h.arm();
  const auto r = Orchestrator(h.gateway).run_tear(seg("1", "源"), config(), std::nullopt);
  CHECK(r.outcome == Outcome::flagged_unmodified);
}

TEST_CASE("a failed refine keeps the initial text and notes the error") {
  Harness h;
  h.script.translations["源"] = "T1";
  h.script.estimates["T1"] = kMajor;
  auto p = h.script.provider();
  p->fail_permanently_if([](const std::string& prompt) { return inspect_prompt(prompt).role == PromptRole::refine; });
  h.with(p);
  const auto r = Orchestrator(h.gateway).run_tear(seg("1", "源"), config(), std::nullopt);
  CHECK(r.outcome == Outcome::flagged_unmodified);
  CHECK(r.final_text == "T1");
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].rfind("refine", 0) == 0);
}

TEST_CASE("a failed translation is recorded, not thrown") {
  Harness h;
  h.arm();  // no translation scripted
  const auto r = Orchestrator(h.gateway).run_tear(seg("1", "未知"), config(), std::nullopt);
  CHECK_FALSE(r.errors.empty());
  CHECK(r.estimations.empty());
}

TEST_CASE("iterative refinement stops when the estimate comes back clean") {
  Harness h;
  h.script.translations["源"] = "T1";
  h.script.estimates = {{"T1", kMajor}, {"T2", kMinor}, {"T3", kClean}};
  h.script.refinements = {{"T1", "T2"}, {"T2", "T3"}, {"T3", "T4"}};
  h.arm();
  RunConfig c = config();
  c.max_iterations = 3;
  const auto r = Orchestrator(h.gateway).run_tear(seg("1", "源"), c, std::nullopt);
  CHECK(r.refined.size() == 2);
  CHECK(r.estimations.size() == 3);
  CHECK(r.final_text == "T3");
  CHECK(r.refined[1].iteration == 2);
  CHECK(h.gateway.count_calls("refine") == 2);
}

TEST_CASE("iterative refinement runs to the bound") {
  Harness h;
  h.script.translations["源"] = "A";
  h.script.estimates = {{"A", kMinor}, {"B", kMinor}};
  h.script.refinements = {{"A", "B"}, {"B", "A"}};
  h.arm();
  RunConfig c = config();
  c.max_iterations = 5;
  const auto r = Orchestrator(h.gateway).run_tear(seg("1", "源"), c, std::nullopt);
  CHECK(r.refined.size() == 5);
  CHECK(r.final_text == "B");
  CHECK(r.outcome == Outcome::flagged_modified);
}

TEST_CASE("force_iterations disables the early stop") {
  Harness h;
  h.script.translations["源"] = "T1";
  h.script.estimates = {{"T1", kMajor}, {"T2", kMajor}};
  h.script.refinements = {{"T1", "T2"}, {"T2", "T3"}, {"T3", "T4"}, {"T4", "T5"}, {"T5", "T6"}};
  h.arm();
  RunConfig c = config();
  c.max_iterations = 5;
  CHECK(Orchestrator(h.gateway).run_tear(seg("1", "源"), c, std::nullopt).refined.size() == 2);
  c.force_iterations = true;
  h.gateway.clear_call_log();
  const auto forced = Orchestrator(h.gateway).run_tear(seg("1", "源"), c, std::nullopt);
  CHECK(forced.refined.size() == 5);
  CHECK(forced.final_text == "T6");
  CHECK(h.gateway.count_calls("refine") == 5);
}

TEST_CASE("one iteration equals the plain loop and the initial draft ignores the bound") {
  Harness h;
  h.script.translations["源"] = "T1";
  h.script.estimates = {{"T1", kMajor}, {"T2", kMajor}};
  h.script.refinements = {{"T1", "T2"}, {"T2", "T3"}};
  h.arm();
  RunConfig c1 = config();
  RunConfig c3 = config();
  c3.max_iterations = 3;
  const auto a = Orchestrator(h.gateway).run_tear(seg("1", "源"), c1, std::nullopt);
  const auto b = Orchestrator(h.gateway).run_tear(seg("1", "源"), c3, std::nullopt);
  CHECK(a.refined.size() == 1);
  CHECK(a.initial == b.initial);
}

TEST_CASE("cross-model configuration routes each stage") {
  Gateway gw(GatewayMode::mock);
  std::vector<std::string> models;
  std::mutex mu;
  ScriptedMock script;
  script.translations["源"] = "T1";
  script.estimates["T1"] = kMajor;
  script.refinements["T1"] = "T2";
  gw.set_mock(std::make_shared<MockProvider>([&](const std::string& model, const std::string& prompt) {
    std::lock_guard lock(mu);
    models.push_back(model);
    return script.respond(prompt);
  }));
  RunConfig c = config();
  c.translate_model = "a";
  c.estimate_model = "b";
  c.refine_model = "c";
  const auto r = Orchestrator(gw).run_tear(seg("1", "源"), c, std::nullopt);
  CHECK(models == std::vector<std::string>{"a", "b", "c"});
  CHECK(r.refined[0].producer_model == "c");
}

TEST_CASE("baselines") {
  Harness h;
  h.script.translations["源"] = "T1";
  h.script.rewrites["T1"] = "T9";
  h.arm();
  Orchestrator o(h.gateway);
  const auto it = o.run_baseline(BaselineKind::it_only, seg("1", "源"), config(), std::nullopt);
  CHECK(it.outcome == Outcome::not_flagged);
  CHECK(it.refined.empty());
  const auto ct = o.run_baseline(BaselineKind::contrastive, seg("1", "源"), config(), std::nullopt);
  CHECK(ct.outcome == Outcome::flagged_modified);
  CHECK(ct.estimations.empty());
  CHECK(ct.final_text == "T9");
  CHECK(h.gateway.count_calls("estimate") == 0);

  Harness same;
  same.script.translations["源"] = "T1";
  same.arm();
  const auto sc = Orchestrator(same.gateway).run_baseline(BaselineKind::scot, seg("1", "源"), config(), std::nullopt);
  CHECK(sc.outcome == Outcome::flagged_unmodified);
}

TEST_CASE("exemplar requirements") {
  Harness h;
  h.script.translations["源"] = "T1";
  h.arm();
  RunConfig c = config();
  c.translate_shots = 5;
  CHECK_THROWS_AS(Orchestrator(h.gateway).run_tear(seg("1", "源"), c, std::nullopt), MissingExemplars);
}

TEST_CASE("experiment summary and ordering") {
  Harness h;
  std::vector<Segment> set;
  for (int i = 0; i < 30; ++i) {
    const std::string src = "源" + std::to_string(i);
    const std::string t = "T" + std::to_string(i);
    h.script.translations[src] = t;
    if (i % 3 == 0) h.script.estimates[t] = kMajor;
    if (i % 6 == 0) h.script.refinements[t] = t + "'";
    set.push_back(seg("s" + std::to_string(i), src));
  }
  auto p = h.script.provider();
  p->set_delay([](const std::string& prompt) { return std::chrono::milliseconds(prompt.size() % 3); });
  h.with(p);
  const auto res = Orchestrator(h.gateway).run_experiment(set, config(), std::nullopt, 8);
  REQUIRE(res.records.size() == 30);
  for (int i = 0; i < 30; ++i) CHECK(res.records[i].segment_id == "s" + std::to_string(i));
  CHECK(res.summary.cn == 10);
  CHECK(res.summary.cm == 5);
  CHECK(res.summary.cu == 5);
  CHECK(res.summary.execution_rate == doctest::Approx(0.5));
  std::size_t refined = 0;
  for (const auto& r : res.records) refined += r.refined.size();
  CHECK(h.gateway.count_calls("refine") == refined);

  CHECK(summarize({}).execution_rate == 0.0);
}

TEST_CASE("output cleaning") {
  CHECK(clean_translation_output("Target: Hello there ") == "Hello there");
  CHECK(clean_translation_output("\nTranslation: Hi") == "Hi");
  CHECK(extract_scot_final("Suggestions: ...\nFinal translation: Done.") == "Done.");
  CHECK(extract_scot_final("Just text") == "Just text");
  CHECK(parse_outcome(to_string(Outcome::flagged_unmodified)) == Outcome::flagged_unmodified);
}
