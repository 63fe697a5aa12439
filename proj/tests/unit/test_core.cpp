#include <doctest.h>

#include <set>

#include "tear/core.hpp"
#include "tear/errors.hpp"
#include "tear/json_io.hpp"
#include "tear/util.hpp"

using namespace tear;

namespace {
RunConfig base_config() {
  RunConfig c;
  c.translate_model = c.estimate_model = c.refine_model = "m";
  return c;
}
}  // namespace

TEST_CASE("language pairs use the ten default codes") {
  for (const char* code : {"en", "fr", "de", "cs", "is", "zh", "ja", "ru", "uk", "he"})
    CHECK(LanguageRegistry::instance().contains(code));
  CHECK(LanguageRegistry::instance().name("zh") == "Chinese");
  const auto p = LanguagePair::parse("zh-en");
  CHECK(p.source_lang == "zh");
  CHECK(p.target_lang == "en");
  CHECK(p.tag() == "zh-en");
  CHECK(p.target_name() == "English");
  CHECK_THROWS_AS(validate(LanguagePair{"en", "en"}), ValidationError);
  CHECK_THROWS_AS(validate(LanguagePair{"xx", "en"}), ValidationError);
  CHECK_THROWS_AS(LanguagePair::parse("zhen"), ValidationError);
}

TEST_CASE("registry is extensible") {
  LanguageRegistry::instance().add("ko", "Korean");
  CHECK_NOTHROW(validate(LanguagePair{"ko", "en"}));
  CHECK_THROWS_AS(LanguageRegistry::instance().add("", "x"), ConfigError);
}

TEST_CASE("segment invariants") {
  Segment s{"1", LanguagePair::parse("zh-en"), "你好", std::nullopt, std::nullopt};
  CHECK_NOTHROW(validate(s));
  s.source_text = "  \t ";
  CHECK_THROWS_AS(validate(s), ValidationError);
  Segment a{"1", LanguagePair::parse("zh-en"), "a", {}, {}};
  Segment b{"1", LanguagePair::parse("zh-en"), "b", {}, {}};
  CHECK_THROWS_AS(validate(std::vector<Segment>{a, b}), ValidationError);
}

TEST_CASE("leakage guard") {
  ExemplarSet ex{LanguagePair::parse("zh-en"), {{"你好", "Hello"}}};
  Segment s{"1", LanguagePair::parse("zh-en"), "你好", {}, {}};
  CHECK_THROWS_AS(check_no_leakage(ex, {s}), ExemplarLeakage);
  s.source_text = "再见";
  CHECK_NOTHROW(check_no_leakage(ex, {s}));
}

TEST_CASE("draft iteration numbering") {
  TranslationDraft init{"1", "t", DraftStage::initial, 0, "m", "translate_few"};
  TranslationDraft r1{"1", "t1", DraftStage::refined, 1, "m", "refine_beta"};
  TranslationDraft r2{"1", "t2", DraftStage::refined, 2, "m", "refine_beta"};
  CHECK_NOTHROW(validate_drafts(init, {r1, r2}));
  CHECK_THROWS_AS(validate_drafts(init, {r2}), ValidationError);
  CHECK_THROWS_AS(validate_drafts(r1, {}), ValidationError);
  CHECK_THROWS_AS(validate_drafts(init, {init}), ValidationError);
}

TEST_CASE("validate_run_config") {
  RunConfig c = base_config();
  c.refine_variant = RefineVariant::beta;
  c.translate_shots = 5;
  CHECK(validate_run_config(c) == c);

  c.translate_shots = 0;
  CHECK_THROWS_AS(validate_run_config(c), ConfigError);
  c.refine_variant = RefineVariant::alpha;
  CHECK_NOTHROW(validate_run_config(c));

  RunConfig z = base_config();
  z.max_iterations = 0;
  CHECK_THROWS_AS(validate_run_config(z), ConfigError);
  RunConfig s = base_config();
  s.estimate_shots = 2;
  CHECK_THROWS_AS(validate_run_config(s), ConfigError);
  RunConfig t = base_config();
  t.decoding.temperature = -0.1;
  CHECK_THROWS_AS(validate_run_config(t), ConfigError);
  RunConfig m = base_config();
  m.refine_model.clear();
  CHECK_THROWS_AS(validate_run_config(m), ConfigError);
}

TEST_CASE("decoding defaults") {
  Decoding d;
  CHECK(d.temperature == 0.0);
  CHECK(d.max_tokens == 1024);
  RunConfig c;
  CHECK(c.max_iterations == 1);
  CHECK_FALSE(c.force_iterations);
}

TEST_CASE("whitespace normalization") {
  CHECK(normalize_whitespace("  a \t b\n\nc  ") == "a b c");
  CHECK(trim("\n x y \t") == "x y");
  CHECK(normalize_whitespace("") == "");
}

TEST_CASE("core types round trip through json") {
  RunConfig c = base_config();
  c.estimate_model = "e";
  c.max_iterations = 3;
  c.force_iterations = true;
  c.sample_seed = -4;
  c.decoding = {0.7, 77};
  CHECK(json(c).get<RunConfig>() == c);

  Segment s{"x", LanguagePair::parse("en-de"), "Hi", std::string("Hallo"), std::nullopt};
  const json j = s;
  CHECK_FALSE(j.contains("doc_id"));
  CHECK(j.get<Segment>() == s);

  TranslationDraft d{"x", "Hallo", DraftStage::refined, 2, "m", "refine_alpha"};
  CHECK(json(d).get<TranslationDraft>() == d);
  ExemplarSet ex{LanguagePair::parse("en-de"), {{"a", "b"}, {"c", "d"}}};
  CHECK(json(ex).get<ExemplarSet>() == ex);
}

TEST_CASE("sha256 and canonical encoding") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  // Length prefixes keep field boundaries distinct.
  CHECK(canonical_encode({"ab", "c"}) != canonical_encode({"a", "bc"}));
}

TEST_CASE("seeded sampling is deterministic and uniform-ish") {
  const auto a = sample_indices(100, 10, 7);
  CHECK(a == sample_indices(100, 10, 7));
  CHECK(a != sample_indices(100, 10, 8));
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 10);
  CHECK(sample_indices(5, 5, 1) == std::vector<std::size_t>{0, 1, 2, 3, 4});

  std::vector<int> hits(10, 0);
  for (std::uint64_t seed = 0; seed < 2000; ++seed)
    for (auto i : sample_indices(10, 3, seed)) ++hits[i];
  for (int h : hits) CHECK(h > 450);  // expected 600 each
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
}

TEST_CASE("utf8 validation reports the first bad byte") {
  CHECK_FALSE(find_invalid_utf8("héllo 中文").has_value());
  CHECK(find_invalid_utf8(std::string("ab\xff" "c")) == 2u);
  CHECK(find_invalid_utf8(std::string("\xe4\xb8")) == 0u);       // truncated sequence
  CHECK(find_invalid_utf8(std::string("a\xc0\xaf")) == 1u);      // overlong
  CHECK(find_invalid_utf8(std::string("\xed\xa0\x80")) == 0u);   // surrogate
}

TEST_CASE("format_fixed") {
  CHECK(format_fixed(26.406) == "26.41");
  CHECK(format_fixed(0.11, 2, true) == "+0.11");
  CHECK(format_fixed(-1.164, 2, true) == "-1.16");
  CHECK(format_fixed(-0.001) == "0.00");
}
