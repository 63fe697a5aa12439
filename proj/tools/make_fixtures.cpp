// Regenerates data/fixtures: the 20-segment mock corpus with its frozen
// cache, the ablation archives, and the preference and ranking tables.
//   tear_make_fixtures <data/fixtures>
#include <algorithm>
#include <iostream>
#include <set>

#include "tear/json_io.hpp"
#include "tear/mock.hpp"
#include "tear/pipeline.hpp"
#include "tear/report.hpp"
#include "tear/util.hpp"

namespace fs = std::filesystem;
using namespace tear;

namespace {

struct Item {
  const char* source;
  const char* reference;
  const char* initial;
  const char* estimate;  // nullptr: no errors
  const char* refined;   // nullptr: refinement returns the draft unchanged
};

std::string est(const std::string& critical, const std::string& major, const std::string& minor) {
  auto f = [](const std::string& s) { return s.empty() ? std::string("no-error") : s; };
  return "critical: " + f(critical) + "\nmajor: " + f(major) + "\nminor: " + f(minor);
}

const std::vector<Item>& items() {
  static const std::string e3 = est("", "style/awkward - \"lowest salary standard\"", "");
  static const std::string e5 = est("", "accuracy/omission - \"高铁\"", "");
  static const std::string e6 = est("", "", "accuracy/mistranslation - \"forgot\"");
  static const std::string e7 = est("accuracy/mistranslation - \"50 percent\"", "", "");
  static const std::string e9 = est("", "", "fluency/grammar - \"outside is too noisy\"");
  static const std::string e10 = est("", "", "style/awkward - \"for tourism\"");
  static const std::string e12 = est("", "", "fluency/grammar - \"suggested him to walk\"");
  static const std::string e13 = est("", "", "locale convention/name format - \"Wei Zhang\"");
  static const std::string e14 = est("", "accuracy/untranslated text - \"坏了\"", "");
  static const std::string e16 = est("", "accuracy/addition - \"with a garden\"", "");
  static const std::string e18 = est("", "", "terminology/inappropriate for context - \"battery endurance time\"");
  static const std::string e20 = est("", "", "fluency/grammar - \"Because of traffic jam\"");
  static const std::vector<Item> v = {
      {"这座城市的地铁系统每天运送数百万乘客。", "The city's subway system carries millions of passengers every day.",
       "The subway system of this city transports millions of passengers every day.", nullptr, nullptr},
      {"他昨天晚上在图书馆学习到十点。", "He studied in the library until ten last night.",
       "He studied at the library until ten o'clock yesterday evening.", nullptr, nullptr},
      {"政府宣布将提高最低工资标准。", "The government announced that it will raise the minimum wage.",
       "The government announced it will raise the lowest salary standard.", e3.c_str(),
       "The government announced that it will raise the minimum wage."},
      {"这部电影讲述了一个关于友谊的故事。", "The film tells a story about friendship.",
       "This movie tells a story of friendship.", nullptr, nullptr},
      {"高铁的开通大大缩短了两地之间的旅行时间。",
       "The opening of the high-speed railway has greatly shortened the travel time between the two places.",
       "The opening greatly shortened the travel time between the two places.", e5.c_str(),
       "The opening of the high-speed rail has greatly shortened travel time between the two places."},
      {"她把钥匙忘在办公室里了。", "She left her keys in the office.", "She forgot the key in the office.", e6.c_str(),
       nullptr},
      {"这家公司去年的利润增长了百分之十五。", "The company's profits grew by 15 percent last year.",
       "The company's profit grew by 50 percent last year.", e7.c_str(),
       "The company's profits grew by 15 percent last year."},
      {"孩子们在公园里放风筝。", "The children are flying kites in the park.",
       "The children are flying kites in the park.", nullptr, nullptr},
      {"请把窗户关上，外面太吵了。", "Please close the window; it's too noisy outside.",
       "Please close the window, outside is too noisy.", e9.c_str(),
       "Please close the window; it is too noisy outside."},
      {"我们计划下个月去云南旅游。", "We plan to travel to Yunnan next month.",
       "We plan to go to Yunnan Province for tourism next month.", e10.c_str(), nullptr},
      {"这本书已经被翻译成二十多种语言。", "The book has been translated into more than twenty languages.",
       "This book has been translated into over twenty languages.", nullptr, nullptr},
      {"医生建议他每天至少走一万步。", "The doctor advised him to walk at least 10,000 steps a day.",
       "The doctor suggested him to walk at least ten thousand steps every day.", e12.c_str(),
       "The doctor advised him to walk at least 10,000 steps a day."},
      {"张伟是这个项目的负责人。", "Zhang Wei is in charge of this project.",
       "Wei Zhang is the person responsible for this project.", e13.c_str(), "Zhang Wei is in charge of this project."},
      {"会议室里的投影仪坏了。", "The projector in the meeting room is broken.",
       "The projector in the meeting room 坏了.", e14.c_str(), "The projector in the conference room is broken."},
      {"这个问题需要进一步研究。", "This issue requires further study.", "This problem needs further research.",
       nullptr, nullptr},
      {"他们在海边买了一栋房子。", "They bought a house by the sea.", "They bought a house by the sea with a garden.",
       e16.c_str(), "They bought a house by the sea."},
      {"天气预报说明天会下大雨。", "The weather forecast says there will be heavy rain tomorrow.",
       "The weather forecast says it will rain heavily tomorrow.", nullptr, nullptr},
      {"这款新手机的电池续航能力很强。", "This new phone has excellent battery life.",
       "The battery endurance time of this new phone is very strong.", e18.c_str(),
       "This new phone has excellent battery life."},
      {"他的演讲赢得了观众的热烈掌声。", "His speech won warm applause from the audience.",
       "His speech won the warm applause of the audience.", nullptr, nullptr},
      {"由于交通堵塞，我上班迟到了。", "I was late for work because of a traffic jam.",
       "Because of traffic jam, I was late to work.", e20.c_str(), nullptr},
  };
  return v;
}

TestSet testset() {
  TestSet ts;
  ts.name = "mock20";
  ts.pair = LanguagePair::parse("zh-en");
  int n = 0;
  for (const auto& it : items()) {
    Segment s;
    s.id = "s" + std::string(++n < 10 ? "0" : "") + std::to_string(n);
    s.pair = ts.pair;
    s.source_text = it.source;
    s.reference_text = it.reference;
    s.doc_id = "doc" + std::to_string((n - 1) / 5 + 1);
    ts.segments.push_back(std::move(s));
  }
  return ts;
}

// The main script; `drop_estimates` / `drop_refinements` list 1-based items
// whose entry is left out, giving the weaker variants of the ablation.
ScriptedMock script(const std::vector<int>& drop_estimates = {}, const std::vector<int>& drop_refinements = {}) {
  ScriptedMock m;
  int n = 0;
  for (const auto& it : items()) {
    ++n;
    m.translations[it.source] = it.initial;
    if (it.estimate && std::find(drop_estimates.begin(), drop_estimates.end(), n) == drop_estimates.end())
      m.estimates[it.initial] = it.estimate;
    if (it.refined && std::find(drop_refinements.begin(), drop_refinements.end(), n) == drop_refinements.end())
      m.refinements[it.initial] = it.refined;
  }
  return m;
}

struct Variant {
  std::string dir;
  std::string label;
  std::string strategy;
  int estimate_shots;
  RefineVariant refine;
  ScriptedMock mock;
};

// Deterministic per-candidate, per-metric score in [lo, lo + 0.2), higher for exact references.
double pseudo_score(const std::string& text, const std::string& metric, const std::set<std::string>& refs,
                    double lo) {
  if (refs.count(text)) return lo + 0.2;
  const std::string h = sha256_hex(metric + "\n" + text);
  return lo + 0.2 * static_cast<double>(std::stoul(h.substr(0, 4), nullptr, 16)) / 65536.0;
}

void write_preference(const fs::path& dir) {
  fs::create_directories(dir);
  // Ground truth: 35 zero-shot wins, 89 ties, 76 few-shot wins (by system).
  std::vector<int> truth;
  truth.insert(truth.end(), 35, 0);
  truth.insert(truth.end(), 89, 1);
  truth.insert(truth.end(), 76, 2);
  SeededRng order(derive_seed(7, "truth"));
  order.shuffle(truth);
  SeededRng sides(derive_seed(7, "sides"));
  json side_map = json::object();
  std::string log;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "p%03zu", i + 1);
    const bool zero_is_a = sides.below(2) == 0;
    side_map[id] = zero_is_a ? "zero-shot" : "few-shot";
    std::string choice = "tie";
    if (truth[i] == 0) choice = zero_is_a ? "A" : "B";
    if (truth[i] == 2) choice = zero_is_a ? "B" : "A";
    PreferenceJudgment j{id, parse_choice(choice), "ann" + std::to_string(i % 3 + 1), "2024-03-01T12:00:00Z"};
    log += json(j).dump() + "\n";
  }
  write_file_atomic(dir / "judgments.jsonl", log);
  write_file_atomic(dir / "side_map.json", side_map.dump(2) + "\n");
}

void write_rankings(const fs::path& path) {
  // Average translation rank per system, and system-level (pairwise accuracy,
  // %) and segment-level (Kendall, %) meta-evaluation scores of each LLM as an
  // MQM estimator, for four language pairs.
  const std::string tsv =
      "pair\tsystem\ttranslation_rank\tsystem_accuracy\tsegment_kendall\n"
      "en-ru\tgpt-3.5-turbo\t2\t66.67\t23.41\n"
      "en-ru\tgemini-pro\t3\t62.86\t19.32\n"
      "en-ru\tclaude-2\t1\t69.52\t26.49\n"
      "en-de\tgpt-3.5-turbo\t1\t78.79\t34.48\n"
      "en-de\tgemini-pro\t2\t86.36\t26.64\n"
      "en-de\tclaude-2\t3\t83.33\t30.33\n"
      "he-en\tgpt-3.5-turbo\t3\t74.24\t19.57\n"
      "he-en\tgemini-pro\t2\t83.33\t30.98\n"
      "he-en\tclaude-2\t1\t92.42\t33.05\n"
      "zh-en\tgpt-3.5-turbo\t1\t90.48\t30.36\n"
      "zh-en\tgemini-pro\t3\t80.95\t21.36\n"
      "zh-en\tclaude-2\t2\t88.57\t34.75\n";
  write_file_atomic(path, tsv);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: tear_make_fixtures <fixtures-dir>\n";
    return 1;
  }
  const fs::path root = argv[1];
  const fs::path mock_dir = root / "mock20";
  fs::create_directories(mock_dir);

  const TestSet ts = testset();
  save_testset(ts, mock_dir / "testset.tsv");
  const ScriptedMock main_script = script();
  write_file_atomic(mock_dir / "script.json", main_script.to_json() + "\n");

  std::vector<Variant> variants = {
      {"it", "IT", "it_only", 3, RefineVariant::beta, main_script},
      {"tear_zero_estimate", "TEaR (zero-shot estimate)", "tear", 0, RefineVariant::beta, script({10, 18, 20}, {})},
      {"tear_few_estimate", "TEaR (few-shot estimate)", "tear", 3, RefineVariant::beta, main_script},
      {"tear_refine_alpha", "TEaR (refine without exemplars)", "tear", 3, RefineVariant::alpha, script({}, {5, 12})},
  };

  // Mock runs fill one shared cache; it is then frozen with fixed timestamps.
  auto cache = std::make_shared<ResponseCache>();
  for (const auto& v : variants) {
    Gateway gw(GatewayMode::mock, cache);
    gw.set_mock(v.mock.provider());
    RunOptions opts;
    opts.config.translate_model = opts.config.estimate_model = opts.config.refine_model = "gpt-3.5-turbo";
    opts.config.estimate_shots = v.estimate_shots;
    opts.config.refine_variant = v.refine;
    opts.strategy = v.strategy;
    execute_run(gw, ts, opts);
  }
  ResponseCache frozen;
  for (auto r : cache->records()) {
    r.timestamp = "2024-03-01T00:00:00Z";
    frozen.put(r);
  }
  frozen.export_to(mock_dir / "cache.jsonl");

  // Ablation archives, replayed from the frozen cache and scored with stubs.
  auto replay = std::make_shared<const ResponseCache>(mock_dir / "cache.jsonl");
  std::set<std::string> refs;
  for (const auto& s : ts.segments) refs.insert(*s.reference_text);
  for (const auto& v : variants) {
    Gateway gw(GatewayMode::replay);
    gw.set_replay_store(replay);
    RunOptions opts;
    opts.config.translate_model = opts.config.estimate_model = opts.config.refine_model = "gpt-3.5-turbo";
    opts.config.estimate_shots = v.estimate_shots;
    opts.config.refine_variant = v.refine;
    opts.strategy = v.strategy;
    opts.label = v.label;
    opts.paths = {{"testset", "data/fixtures/mock20/testset.tsv"}, {"mode", "replay"}};
    RunArchive a = execute_run(gw, ts, opts);
    score_bleu(a);
    const std::pair<NeuralMetric, double> metrics[] = {
        {NeuralMetric::comet22, 0.70}, {NeuralMetric::cometkiwi, 0.68}, {NeuralMetric::bleurt20, 0.55}};
    for (const auto& [metric, lo] : metrics) {
      StubScorer stub;
      stub.metrics = {metric};
      for (const auto& r : a.records)
        for (const std::string* t : {&r.initial.text, &r.final_text})
          stub.table[sha256_hex(*t)] = pseudo_score(*t, to_string(metric), refs, lo);
      ScorerBridge bridge(stub.transport());
      bridge.handshake();
      score_neural(a, bridge, {metric});
    }
    save_run(a, root / "ablation" / v.dir);
    std::cout << v.dir << ": CN " << a.summary.cn << " CM " << a.summary.cm << " CU " << a.summary.cu << "\n";
  }

  write_preference(root / "preference");
  write_rankings(root / "rankings.tsv");
  std::cout << "fixtures written to " << root << "\n";
  return 0;
}
