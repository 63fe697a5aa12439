#include <doctest.h>

#include <fstream>
#include <set>

#include "tear/corpus.hpp"
#include "tear/errors.hpp"
#include "test_support.hpp"

using namespace tear;

namespace {
const LanguagePair kZhEn = LanguagePair::parse("zh-en");

TestSet numbered(std::size_t n) {
  TestSet ts{"t", kZhEn, {}, ""};
  for (std::size_t i = 0; i < n; ++i)
    ts.segments.push_back({std::to_string(i), kZhEn, "句子" + std::to_string(i), std::nullopt, std::nullopt});
  return ts;
}
}  // namespace

TEST_CASE("tsv test sets") {
  const auto ts = parse_testset_tsv("id\tsource\treference\n1\t你好\tHello\n2\t再见\t\n", kZhEn);
  REQUIRE(ts.segments.size() == 2);
  CHECK(ts.segments[0].reference_text == std::string("Hello"));
  CHECK_FALSE(ts.segments[1].reference_text.has_value());
  CHECK_FALSE(ts.segments[0].doc_id.has_value());
  CHECK(ts.segments[1].pair == kZhEn);

  const auto reordered = parse_testset_tsv("source\tdoc_id\tid\r\n你好\td1\ta\r\n", kZhEn);
  CHECK(reordered.segments[0].id == "a");
  CHECK(reordered.segments[0].doc_id == std::string("d1"));
  CHECK(reordered.segments[0].source_text == "你好");
}

TEST_CASE("tsv errors carry the line") {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_testset_tsv(text, kZhEn);
    } catch (const FormatError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("") == 1);
  CHECK(line_of("id\treference\n1\tx\n") == 1);
  CHECK(line_of("id\tsource\n1\ta\n2\n") == 3);
  CHECK(line_of("id\tsource\n1\ta\n1\tb\n") == 3);
  CHECK(line_of("id\tsource\n1\t  \n") == 2);
}

TEST_CASE("invalid UTF-8 reports the byte offset") {
  tear::testing::TempDir dir;
  std::ofstream(dir / "bad.tsv", std::ios::binary) << "id\tsource\n1\tab\xff\n";
  try {
    load_testset(dir / "bad.tsv", kZhEn);
    FAIL("expected EncodingError");
  } catch (const EncodingError& e) {
    CHECK(e.offset() == 14);
  }
}

TEST_CASE("save and load round trip") {
  tear::testing::TempDir dir;
  TestSet ts = parse_testset_tsv("id\tsource\treference\tdoc_id\n1\t你好\tHello\td\n2\t再见\t\t\n", kZhEn);
  save_testset(ts, dir / "t.tsv");
  const auto back = load_testset(dir / "t.tsv", kZhEn);
  CHECK(back.segments == ts.segments);
  CHECK(back.provenance == (dir / "t.tsv").string());

  ts.segments[0].source_text = "tab\there";
  CHECK_THROWS_AS(testset_to_tsv(ts), ValidationError);
}

TEST_CASE("parallel text") {
  tear::testing::TempDir dir;
  std::ofstream(dir / "src.txt") << "一\n二\n三\n";
  std::ofstream(dir / "ref.txt") << "one\ntwo\nthree\n";
  std::ofstream(dir / "short.txt") << "one\n";
  const auto ts = load_parallel_text(dir / "src.txt", dir / "ref.txt", kZhEn);
  REQUIRE(ts.segments.size() == 3);
  CHECK(ts.segments[2].id == "3");
  CHECK(ts.segments[2].reference_text == std::string("three"));
  CHECK(load_parallel_text(dir / "src.txt", kZhEn).segments[0].reference_text == std::nullopt);
  CHECK_THROWS_AS(load_parallel_text(dir / "src.txt", dir / "short.txt", kZhEn), FormatError);
}

TEST_CASE("sampling") {
  const auto ts = numbered(1000);
  const auto a = sample_testset(ts, 200, 42);
  CHECK(a.segments.size() == 200);
  CHECK(a.segments == sample_testset(ts, 200, 42).segments);
  CHECK(a.segments != sample_testset(ts, 200, 43).segments);
  std::set<std::string> ids;
  int prev = -1;
  for (const auto& s : a.segments) {
    ids.insert(s.id);
    CHECK(std::stoi(s.id) > prev);  // original order kept
    prev = std::stoi(s.id);
  }
  CHECK(ids.size() == 200);
  CHECK(sample_testset(numbered(150), 150, 1).segments == numbered(150).segments);
  CHECK_THROWS_AS(sample_testset(numbered(150), 200, 1), SampleTooLarge);
}

TEST_CASE("bundled mock fixture loads") {
  const auto ts = load_testset(tear::testing::fixture("mock20/testset.tsv"), kZhEn);
  CHECK(ts.segments.size() == 20);
  for (const auto& s : ts.segments) CHECK(s.reference_text.has_value());
}

TEST_CASE("MQM dump") {
  const auto rows = parse_mqm_dump(
      "system\tsegment_id\tseverity\tcategory\tspan\n"
      "A\t1\tmajor\taccuracy/omission\tthe cat\n"
      "A\t2\tno-error\t\t\n"
      "B\t1\tminor\tstyle/awkward\t\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].span == std::string("the cat"));
  CHECK_FALSE(rows[2].span.has_value());
  CHECK(rows[2].line == 4);
  const auto h = load_human_mqm(rows);
  CHECK(h.scores.at({"A", "1"}).value == -5.0);
  CHECK_THROWS_AS(parse_mqm_dump("system\tseverity\nA\tmajor\n"), FormatError);
}
