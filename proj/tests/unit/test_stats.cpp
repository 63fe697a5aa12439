#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ranking_fixture.hpp"
#include "tear/errors.hpp"
#include "tear/stats.hpp"

using namespace tear;
using tear::testing::brute_kendall;
using tear::testing::brute_pairwise_accuracy;

namespace {
constexpr KendallVariant kVariants[] = {KendallVariant::tau_a, KendallVariant::tau_b, KendallVariant::tau_c};
}

TEST_CASE("kendall_tau worked values") {
  CHECK(kendall_tau({1, 2, 3}, {2, 1, 3}, KendallVariant::tau_a) == doctest::Approx(1.0 / 3));
  CHECK(kendall_tau({1, 2, 3, 4}, {1, 2, 3, 4}) == doctest::Approx(1.0));
  CHECK(kendall_tau({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  // Ties: tau_b normalizes by the untied pairs.
  CHECK(kendall_tau({1, 1, 2}, {1, 2, 3}, KendallVariant::tau_a) == doctest::Approx(2.0 / 3));
  CHECK(kendall_tau({1, 1, 2}, {1, 2, 3}, KendallVariant::tau_b) == doctest::Approx(2.0 / std::sqrt(6.0)));
  CHECK_THROWS_AS(kendall_tau({1, 1, 1}, {1, 2, 3}), DegenerateInput);
  CHECK_THROWS_AS(kendall_tau({1}, {1}), DegenerateInput);
  CHECK_THROWS_AS(kendall_tau({1, 2}, {1, 2, 3}), LengthMismatch);
  CHECK(parse_kendall_variant("tau_c") == KendallVariant::tau_c);
}

TEST_CASE("kendall_tau agrees with brute-force pair counting") {
  std::mt19937_64 rng(42);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    const int levels = 1 + static_cast<int>(rng() % 6);  // small ranges force ties
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = static_cast<double>(rng() % levels);
    for (auto& v : y) v = static_cast<double>(rng() % levels);
    for (auto variant : kVariants) {
      const auto expect = brute_kendall(x, y, variant);
      if (!expect) {
        CHECK_THROWS_AS(kendall_tau(x, y, variant), DegenerateInput);
        continue;
      }
      CHECK(std::abs(kendall_tau(x, y, variant) - *expect) <= 1e-12);
      ++checked;
    }
  }
  CHECK(checked > 1500);
}

TEST_CASE("pairwise accuracy") {
  CHECK(pairwise_accuracy({3, 2, 1}, {3, 2, 1}) == 1.0);
  CHECK(pairwise_accuracy({1, 2, 3}, {2, 1, 3}) == doctest::Approx(2.0 / 3));
  CHECK(pairwise_accuracy({1, 1}, {1, 1}) == 1.0);
  CHECK(pairwise_accuracy({1, 1}, {1, 2}) == 0.0);
  CHECK_THROWS_AS(pairwise_accuracy({1}, {1}), TooFewSystems);
  CHECK_THROWS_AS(pairwise_accuracy({1, 2}, {1}), LengthMismatch);

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 9;
    std::vector<double> m(n), h(n);
    for (auto& v : m) v = static_cast<double>(rng() % 5) / 4.0;
    for (auto& v : h) v = -static_cast<double>(rng() % 6);
    CHECK(pairwise_accuracy(m, h) == brute_pairwise_accuracy(m, h));
  }
}

TEST_CASE("alignment keeps complete cases") {
  SystemEvalTable::Cells metric = {{{"A", "1"}, 0.9}, {{"A", "2"}, 0.8}, {{"B", "1"}, 0.7}, {{"B", "2"}, 0.6},
                                   {{"A", "3"}, 0.5}};
  SystemEvalTable::Cells human = {{{"A", "1"}, -1}, {{"A", "2"}, -2}, {{"B", "1"}, -3}, {{"B", "2"}, -5},
                                  {{"B", "3"}, 0}};
  const auto t = SystemEvalTable::align(metric, human);
  CHECK(t.systems == std::vector<std::string>{"A", "B"});
  CHECK(t.segments == std::vector<std::string>{"1", "2"});
  CHECK(t.dropped_segments == 1);
  CHECK(t.system_metric_means()[0] == doctest::Approx(0.85));
  CHECK(t.system_human_means()[1] == doctest::Approx(-4.0));
  CHECK(pairwise_accuracy(t) == 1.0);
}

TEST_CASE("segment-level kendall groupings") {
  SystemEvalTable t;
  t.systems = {"A", "B"};
  t.segments = {"1", "2", "3"};
  t.metric = {{0.9, 0.5, 0.1}, {0.8, 0.6, 0.2}};
  t.human = {{0, -5, -9}, {-1, -1, -3}};
  std::vector<double> flat_m = {0.9, 0.5, 0.1, 0.8, 0.6, 0.2}, flat_h = {0, -5, -9, -1, -1, -3};
  CHECK(segment_kendall(t, KendallVariant::tau_b) == doctest::Approx(*brute_kendall(flat_m, flat_h, KendallVariant::tau_b)));
  const double by_sys = (*brute_kendall(t.metric[0], t.human[0], KendallVariant::tau_b) +
                         *brute_kendall(t.metric[1], t.human[1], KendallVariant::tau_b)) /
                        2.0;
  CHECK(segment_kendall(t, KendallVariant::tau_b, KendallGrouping::by_system) == doctest::Approx(by_sys));
  // Segment 2 is constant on the human side and is skipped.
  const double by_seg = (*brute_kendall({0.9, 0.8}, {0, -1}, KendallVariant::tau_b) +
                         *brute_kendall({0.1, 0.2}, {-9, -3}, KendallVariant::tau_b)) /
                        2.0;
  CHECK(segment_kendall(t, KendallVariant::tau_b, KendallGrouping::by_segment) == doctest::Approx(by_seg));

  SystemEvalTable flat = t;
  flat.human = {{-1, -1, -1}, {-1, -1, -1}};
  CHECK_THROWS_AS(segment_kendall(flat, KendallVariant::tau_b, KendallGrouping::by_system), DegenerateInput);
}

TEST_CASE("rankings") {
  const auto r = ranks_from_scores({"a", "b", "c"}, {0.5, 0.9, 0.1});
  CHECK(r.ranks == std::vector<int>{2, 1, 3});
  CHECK(ranks_from_scores({"a", "b"}, {1, 2}, false).ranks == std::vector<int>{1, 2});
  CHECK_THROWS_AS(ranks_from_scores({"a", "b"}, {1, 1}), DegenerateInput);
  CHECK_THROWS_AS(validate(RankingVector{{"a", "b"}, {1, 1}}), ValidationError);

  RankingVector x{{"A", "B", "C"}, {1, 2, 3}};
  RankingVector y{{"C", "A", "B"}, {3, 2, 1}};  // B > A > C
  CHECK(ranking_correlation(x, y) == doctest::Approx(1.0 / 3));
  CHECK_THROWS_AS(ranking_correlation(x, RankingVector{{"A", "B", "D"}, {1, 2, 3}}), EntityMismatch);
}

TEST_CASE("translation ranking vs metric evaluation ranking") {
  const auto fixture = tear::testing::load_rankings();
  const std::map<std::string, double> system_level = {{"en-ru", 1}, {"en-de", -1.0 / 3}, {"he-en", 1}, {"zh-en", 1}};
  const std::map<std::string, double> segment_level = {{"en-ru", 1}, {"en-de", 1.0 / 3}, {"he-en", 1}, {"zh-en", 1.0 / 3}};
  REQUIRE(fixture.size() == 4);
  for (const auto& [pair, p] : fixture) {
    CHECK_MESSAGE(tear::testing::rank_agreement(p, p.system_accuracy) == doctest::Approx(system_level.at(pair)), pair);
    CHECK_MESSAGE(tear::testing::rank_agreement(p, p.segment_kendall) == doctest::Approx(segment_level.at(pair)), pair);
  }
}
