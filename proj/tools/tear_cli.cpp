// tear: command-line front end over the tear_core library.
#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "tear/bleu.hpp"
#include "tear/errors.hpp"
#include "tear/json_io.hpp"
#include "tear/mock.hpp"
#include "tear/pipeline.hpp"
#include "tear/pref.hpp"
#include "tear/report.hpp"
#include "tear/util.hpp"

namespace fs = std::filesystem;
using namespace tear;

namespace {

struct GatewayFlags {
  std::string mode = "live";
  std::string providers;
  std::string mock_script;
  std::string replay_store;
  std::string cache;
  std::size_t parallelism = 1;

  void add(CLI::App* app) {
    app->add_option("--mode", mode, "live | mock | replay")->check(CLI::IsMember({"live", "mock", "replay"}));
    app->add_option("--providers", providers, "provider config JSON (live mode)");
    app->add_option("--mock-script", mock_script, "scripted mock JSON (mock mode)");
    app->add_option("--replay-store", replay_store, "frozen cache JSONL (replay mode)");
    app->add_option("--cache", cache, "response cache JSONL, read and appended");
    app->add_option("--parallelism", parallelism, "concurrent segments")->check(CLI::PositiveNumber);
  }

  std::unique_ptr<Gateway> build() const {
    auto c = cache.empty() ? std::make_shared<ResponseCache>() : std::make_shared<ResponseCache>(fs::path(cache));
    const GatewayMode m = parse_gateway_mode(mode);
    if (m == GatewayMode::live) {
      if (providers.empty()) throw ConfigError("live mode needs --providers (or use --mode mock/replay)");
      return Gateway::from_config(providers, c);
    }
    auto g = std::make_unique<Gateway>(m, c);
    if (m == GatewayMode::mock) {
      if (mock_script.empty()) throw ConfigError("mock mode needs --mock-script");
      g->set_mock(ScriptedMock::load(mock_script).provider());
    } else {
      if (replay_store.empty()) throw ConfigError("replay mode needs --replay-store");
      if (!fs::exists(replay_store)) throw ConfigError("replay store " + replay_store + " does not exist");
      g->set_replay_store(std::make_shared<const ResponseCache>(fs::path(replay_store)));
    }
    return g;
  }
};

struct InputFlags {
  std::string pair;
  std::string testset;
  std::string source;
  std::string reference;

  void add(CLI::App* app) {
    app->add_option("--pair", pair, "language pair, e.g. zh-en")->required();
    app->add_option("--testset", testset, "test set tsv (id, source, reference?, doc_id?)");
    app->add_option("--source", source, "source text, one segment per line");
    app->add_option("--reference", reference, "reference text aligned with --source");
  }

  TestSet load() const {
    const auto p = LanguagePair::parse(pair);
    if (!testset.empty() && !source.empty()) throw ConfigError("give either --testset or --source, not both");
    if (!testset.empty()) return load_testset(testset, p);
    if (!source.empty()) return load_parallel_text(source, reference, p);
    throw ConfigError("an input is required: --testset or --source");
  }
};

struct ConfigFlags {
  std::string model = "gpt-3.5-turbo";
  std::string translate_model, estimate_model, refine_model;
  int translate_shots = 5;
  int estimate_shots = 3;
  std::string refine_variant = "beta";
  int max_iterations = 1;
  bool force_iterations = false;
  std::int64_t seed = 0;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::string exemplars;
  std::string templates;

  void add(CLI::App* app) {
    app->add_option("--model", model, "model for every module unless overridden");
    app->add_option("--translate-model", translate_model);
    app->add_option("--estimate-model", estimate_model);
    app->add_option("--refine-model", refine_model);
    app->add_option("--translate-shots", translate_shots)->check(CLI::IsMember({0, 5}));
    app->add_option("--estimate-shots", estimate_shots)->check(CLI::IsMember({0, 3}));
    app->add_option("--refine-variant", refine_variant)->check(CLI::IsMember({"alpha", "beta"}));
    app->add_option("--max-iterations", max_iterations);
    app->add_flag("--force-iterations", force_iterations, "refine for all max-iterations rounds");
    app->add_option("--seed", seed, "exemplar selection seed");
    app->add_option("--temperature", temperature);
    app->add_option("--max-tokens", max_tokens);
    app->add_option("--exemplars", exemplars, "exemplar pool tsv (default: bundled pool)");
    app->add_option("--templates", templates, "directory overriding the bundled prompt templates");
  }

  RunConfig config() const {
    RunConfig c;
    c.translate_model = translate_model.empty() ? model : translate_model;
    c.estimate_model = estimate_model.empty() ? model : estimate_model;
    c.refine_model = refine_model.empty() ? model : refine_model;
    c.translate_shots = translate_shots;
    c.estimate_shots = estimate_shots;
    c.refine_variant = parse_refine_variant(refine_variant);
    c.max_iterations = max_iterations;
    c.force_iterations = force_iterations;
    c.sample_seed = seed;
    c.decoding.temperature = temperature;
    c.decoding.max_tokens = max_tokens;
    return validate_run_config(c);
  }

  TemplateStore template_store() const {
    return templates.empty() ? TemplateStore::builtin() : TemplateStore::load(templates);
  }
};

std::map<std::string, std::string> read_id_tsv(const std::string& path, const std::string& value_column) {
  const std::string text = read_file(path);
  auto lines = split(text, '\n');
  if (lines.empty()) throw FormatError(1, path + ": empty file");
  const auto header = split(trim(lines[0]), '\t');
  if (header.size() != 2 || header[0] != "id" || header[1] != value_column)
    throw FormatError(1, path + ": expected header 'id\\t" + value_column + "'");
  std::map<std::string, std::string> out;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    std::string l = lines[n];
    if (!l.empty() && l.back() == '\r') l.pop_back();
    if (l.empty()) continue;
    const auto c = split(l, '\t');
    if (c.size() != 2) throw FormatError(n + 1, path + ": expected 2 columns");
    out[c[0]] = c[1];
  }
  return out;
}

std::string one_line(std::string s) {
  for (auto& ch : s)
    if (ch == '\t' || ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

void emit(const std::string& output, const std::string& content) {
  if (output.empty() || output == "-") std::cout << content;
  else write_file_atomic(output, content);
}

std::vector<std::string> split_command(const std::string& cmd) {
  std::vector<std::string> argv;
  for (auto& part : split(cmd, ' '))
    if (!part.empty()) argv.push_back(part);
  if (argv.empty()) throw ConfigError("empty --scorer command");
  return argv;
}

int exit_code_for(ErrorClass c) {
  switch (c) {
    case ErrorClass::usage: return 1;
    case ErrorClass::data: return 2;
    case ErrorClass::provider: return 3;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tear: translate, estimate and refine with LLMs; score, meta-evaluate and report"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(TEAR_VERSION));

  // translate
  InputFlags t_in;
  ConfigFlags t_cfg;
  GatewayFlags t_gw;
  std::string t_out;
  auto* translate = app.add_subcommand("translate", "initial translations as id/translation tsv");
  t_in.add(translate);
  t_cfg.add(translate);
  t_gw.add(translate);
  translate->add_option("-o,--output", t_out, "output tsv (default stdout)");

  // estimate
  InputFlags e_in;
  ConfigFlags e_cfg;
  GatewayFlags e_gw;
  std::string e_trans, e_out;
  auto* estimate = app.add_subcommand("estimate", "MQM estimations of given translations as JSONL");
  e_in.add(estimate);
  e_cfg.add(estimate);
  e_gw.add(estimate);
  estimate->add_option("--translations", e_trans, "tsv with columns id, translation")->required();
  estimate->add_option("-o,--output", e_out);

  // refine
  InputFlags r_in;
  ConfigFlags r_cfg;
  GatewayFlags r_gw;
  std::string r_trans, r_est, r_out;
  auto* refine = app.add_subcommand("refine", "refine flagged translations using estimation feedback");
  r_in.add(refine);
  r_cfg.add(refine);
  r_gw.add(refine);
  refine->add_option("--translations", r_trans)->required();
  refine->add_option("--estimations", r_est, "JSONL from `tear estimate`")->required();
  refine->add_option("-o,--output", r_out);

  // tear / baseline
  InputFlags run_in;
  ConfigFlags run_cfg;
  GatewayFlags run_gw;
  std::string run_out, run_label, baseline_kind = "it";
  auto* tear_cmd = app.add_subcommand("tear", "full translate/estimate/refine run, written as a run archive");
  auto* baseline = app.add_subcommand("baseline", "IT-only, SCoT or contrastive run, written as a run archive");
  for (auto* cmd : {tear_cmd, baseline}) {
    run_in.add(cmd);
    run_cfg.add(cmd);
    run_gw.add(cmd);
    cmd->add_option("-o,--output", run_out, "archive directory")->required();
    cmd->add_option("--label", run_label, "row name in reports");
  }
  baseline->add_option("--kind", baseline_kind)->check(CLI::IsMember({"it", "scot", "contrastive"}));

  // score
  std::string s_archive, s_scorer, s_metrics = "comet22,cometkiwi,bleurt20";
  bool s_stub = false;
  double s_stub_constant = 0.5;
  auto* score = app.add_subcommand("score", "BLEU and neural metric scores for a run archive");
  score->add_option("--archive", s_archive)->required();
  score->add_option("--scorer", s_scorer, "scorer command speaking the bridge protocol");
  score->add_flag("--scorer-stub", s_stub, "use the built-in deterministic stub scorer");
  score->add_option("--stub-constant", s_stub_constant);
  score->add_option("--metrics", s_metrics, "comma-separated neural metrics");

  // meta-eval
  std::string m_scores, m_mqm, m_pair, m_metric = "metric", m_grouping = "global", m_archive, m_out;
  auto* meta = app.add_subcommand("meta-eval", "pairwise accuracy and Kendall against human MQM");
  meta->add_option("--metric-scores", m_scores, "tsv: system, segment_id, score")->required();
  meta->add_option("--mqm", m_mqm, "human MQM dump (simplified schema)")->required();
  meta->add_option("--pair", m_pair)->required();
  meta->add_option("--metric", m_metric, "metric name for the report");
  meta->add_option("--grouping", m_grouping)->check(CLI::IsMember({"global", "by_system", "by_segment"}));
  meta->add_option("--archive", m_archive, "attach the result to this run archive");
  meta->add_option("-o,--output", m_out);

  // report
  std::string rep_kind, rep_format = "text", rep_out;
  std::vector<std::string> rep_archives;
  auto* report = app.add_subcommand("report", "render a table from run archives");
  report->add_option("--kind", rep_kind)->required();
  report->add_option("--format", rep_format)->check(CLI::IsMember({"text", "tsv"}));
  report->add_option("-o,--output", rep_out);
  report->add_option("archives", rep_archives, "archive directories")->required();

  // sample
  InputFlags sm_in;
  std::size_t sm_n = 200;
  std::int64_t sm_seed = 0;
  std::string sm_out;
  auto* sample = app.add_subcommand("sample", "deterministic sample of a test set");
  sm_in.add(sample);
  sample->add_option("-n", sm_n)->required();
  sample->add_option("--seed", sm_seed);
  sample->add_option("-o,--output", sm_out);

  // cache
  std::string c_cache, c_file;
  auto* cache = app.add_subcommand("cache", "export or import response caches");
  cache->require_subcommand(1);
  auto* cache_export = cache->add_subcommand("export", "write the cache, sorted by key");
  cache_export->add_option("--cache", c_cache)->required();
  cache_export->add_option("-o,--output", c_file)->required();
  auto* cache_import = cache->add_subcommand("import", "merge records; conflicting keys abort the import");
  cache_import->add_option("--cache", c_cache)->required();
  cache_import->add_option("-i,--input", c_file)->required();

  // serve-pref
  std::string p_root = "pref-sessions", p_host = "127.0.0.1", p_token;
  int p_port = 8080;
  auto* serve = app.add_subcommand("serve-pref", "HTTP backend for pairwise preference sessions");
  serve->add_option("--sessions", p_root, "session directory");
  serve->add_option("--host", p_host);
  serve->add_option("--port", p_port);
  serve->add_option("--admin-token", p_token, "admin token (default: $TEAR_ADMIN_TOKEN)");

  // pref-tally
  std::string pt_root = "pref-sessions", pt_session, pt_archive;
  auto* pref_tally = app.add_subcommand("pref-tally", "de-randomized tally of a session, optionally attached");
  pref_tally->add_option("--sessions", pt_root);
  pref_tally->add_option("--session", pt_session)->required();
  pref_tally->add_option("--archive", pt_archive, "attach the tally to this run archive");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*translate) {
      const auto ts = t_in.load();
      const auto cfg = t_cfg.config();
      const auto store = t_cfg.template_store();
      auto gw = t_gw.build();
      RunOptions opts;
      opts.config = cfg;
      if (!t_cfg.exemplars.empty()) opts.exemplar_pool = load_exemplar_pool(t_cfg.exemplars);
      const auto ex = exemplars_for(opts, ts);
      std::vector<CompletionRequest> reqs;
      for (const auto& s : ts.segments)
        reqs.push_back({cfg.translate_model, build_translate_prompt(s, cfg.translate_shots ? ex : std::nullopt, store).text,
                        cfg.decoding, "translate"});
      const auto results = gw->complete_batch(reqs, t_gw.parallelism);
      std::string out = "id\ttranslation\n";
      int failed = 0;
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i].ok()) {
          std::cerr << "segment " << ts.segments[i].id << ": " << results[i].error_message << "\n";
          ++failed;
          continue;
        }
        out += ts.segments[i].id + "\t" + one_line(clean_translation_output(results[i].response->text)) + "\n";
      }
      emit(t_out, out);
      return failed ? 3 : 0;
    }

    if (*estimate) {
      const auto ts = e_in.load();
      const auto cfg = e_cfg.config();
      const auto store = e_cfg.template_store();
      const auto trans = read_id_tsv(e_trans, "translation");
      auto gw = e_gw.build();
      std::vector<CompletionRequest> reqs;
      std::vector<std::string> ids;
      for (const auto& s : ts.segments) {
        auto it = trans.find(s.id);
        if (it == trans.end()) continue;
        ids.push_back(s.id);
        reqs.push_back({cfg.estimate_model,
                        build_estimate_prompt(s.source_text, it->second, ts.pair, cfg.estimate_shots, store).text,
                        cfg.decoding, "estimate"});
      }
      const auto results = gw->complete_batch(reqs, e_gw.parallelism);
      std::string out;
      int failed = 0;
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i].ok()) {
          std::cerr << "segment " << ids[i] << ": " << results[i].error_message << "\n";
          ++failed;
          continue;
        }
        out += json{{"segment_id", ids[i]}, {"estimation", parse_estimation(results[i].response->text)}}.dump() + "\n";
      }
      emit(e_out, out);
      return failed ? 3 : 0;
    }

    if (*refine) {
      const auto ts = r_in.load();
      const auto cfg = r_cfg.config();
      const auto store = r_cfg.template_store();
      const auto trans = read_id_tsv(r_trans, "translation");
      std::map<std::string, EstimationResult> est;
      std::size_t n = 0;
      for (const auto& line : split(read_file(r_est), '\n')) {
        ++n;
        if (trim(line).empty()) continue;
        try {
          const json j = json::parse(line);
          est[j.at("segment_id").get<std::string>()] = j.at("estimation").get<EstimationResult>();
        } catch (const json::exception& e) {
          throw FormatError(n, r_est + ": " + e.what());
        }
      }
      RunOptions opts;
      opts.config = cfg;
      if (!r_cfg.exemplars.empty()) opts.exemplar_pool = load_exemplar_pool(r_cfg.exemplars);
      const auto ex = exemplars_for(opts, ts);
      auto gw = r_gw.build();
      std::vector<CompletionRequest> reqs;
      std::vector<std::string> ids;
      std::map<std::string, std::string> refined;
      for (const auto& s : ts.segments) {
        auto t = trans.find(s.id);
        if (t == trans.end()) continue;
        refined[s.id] = t->second;
        auto e = est.find(s.id);
        if (e == est.end() || !e->second.needs_refinement) continue;
        ids.push_back(s.id);
        reqs.push_back({cfg.refine_model,
                        build_refine_prompt(cfg.refine_variant, s.source_text, t->second,
                                            serialize_feedback(e->second), ts.pair,
                                            cfg.refine_variant == RefineVariant::beta ? ex : std::nullopt, store)
                            .text,
                        cfg.decoding, "refine"});
      }
      const auto results = gw->complete_batch(reqs, r_gw.parallelism);
      int failed = 0;
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i].ok()) {
          std::cerr << "segment " << ids[i] << ": " << results[i].error_message << " (kept the input)\n";
          ++failed;
          continue;
        }
        const std::string text = clean_translation_output(results[i].response->text);
        if (!trim(text).empty()) refined[ids[i]] = text;
      }
      std::string out = "id\ttranslation\n";
      for (const auto& s : ts.segments)
        if (refined.count(s.id)) out += s.id + "\t" + one_line(refined[s.id]) + "\n";
      emit(r_out, out);
      return failed ? 3 : 0;
    }

    if (*tear_cmd || *baseline) {
      const auto ts = run_in.load();
      RunOptions opts;
      opts.config = run_cfg.config();
      opts.strategy = *tear_cmd ? "tear" : baseline_kind == "it" ? "it_only" : baseline_kind;
      opts.label = run_label;
      opts.parallelism = run_gw.parallelism;
      if (!run_cfg.exemplars.empty()) opts.exemplar_pool = load_exemplar_pool(run_cfg.exemplars);
      opts.paths["testset"] = !run_in.testset.empty() ? run_in.testset : run_in.source;
      if (!run_in.reference.empty()) opts.paths["reference"] = run_in.reference;
      if (!run_cfg.exemplars.empty()) opts.paths["exemplars"] = run_cfg.exemplars;
      if (!run_cfg.templates.empty()) opts.paths["templates"] = run_cfg.templates;
      opts.paths["mode"] = run_gw.mode;
      save_manifest(make_manifest(opts, ts), run_out);
      const auto store = run_cfg.template_store();
      auto gw = run_gw.build();
      RunArchive archive = execute_run(*gw, ts, opts, store);
      save_run(archive, run_out);
      const auto& s = archive.summary;
      std::cerr << "segments " << s.segments << "  CN " << s.cn << "  CM " << s.cm << "  CU " << s.cu
                << "  failed " << s.failed << "\n";
      return s.failed ? 3 : 0;
    }

    if (*score) {
      RunArchive archive = load_run(s_archive);
      score_bleu(archive);
      if (s_stub || !s_scorer.empty()) {
        std::shared_ptr<ScorerTransport> transport;
        if (s_stub) {
          StubScorer stub;
          stub.constant = s_stub_constant;
          transport = stub.transport();
        } else {
          transport = std::make_shared<SubprocessTransport>(split_command(s_scorer));
        }
        ScorerBridge bridge(transport);
        bridge.handshake();
        std::vector<NeuralMetric> metrics;
        for (const auto& m : split(s_metrics, ','))
          if (!trim(m).empty()) metrics.push_back(parse_neural_metric(trim(m)));
        score_neural(archive, bridge, metrics);
      }
      save_run(archive, s_archive);
      for (const auto& [k, v] : archive.corpus_final) std::cerr << k << " " << format_fixed(v, 4) << "\n";
      return 0;
    }

    if (*meta) {
      const auto metric = parse_metric_scores_tsv(read_file(m_scores));
      const auto human = human_cells(load_human_mqm(load_mqm_dump(m_mqm)));
      json row = meta_evaluate(metric, human, LanguagePair::parse(m_pair).tag(), parse_kendall_grouping(m_grouping));
      if (!m_archive.empty()) {
        RunArchive archive = load_run(m_archive);
        json me = archive.meta_eval.value_or(json{{"metric", m_metric}, {"pairs", json::array()}});
        me["metric"] = m_metric;
        json pairs = json::array();
        for (const auto& p : me["pairs"])
          if (p.value("pair", "") != row["pair"]) pairs.push_back(p);
        pairs.push_back(row);
        me["pairs"] = pairs;
        archive.meta_eval = me;
        save_run(archive, m_archive);
      }
      emit(m_out, row.dump(2) + "\n");
      return 0;
    }

    if (*report) {
      std::vector<RunArchive> archives;
      for (const auto& dir : rep_archives) archives.push_back(load_run(dir));
      const auto table = render_report(archives, parse_report_kind(rep_kind));
      emit(rep_out, rep_format == "tsv" ? table.to_tsv() : table.to_text());
      return 0;
    }

    if (*sample) {
      const auto ts = sample_testset(sm_in.load(), sm_n, sm_seed);
      emit(sm_out, testset_to_tsv(ts));
      return 0;
    }

    if (*cache_export) {
      if (!fs::exists(c_cache)) throw ConfigError("cache " + c_cache + " does not exist");
      ResponseCache c{fs::path(c_cache)};
      std::cerr << c.export_to(c_file) << " records exported\n";
      return 0;
    }
    if (*cache_import) {
      ResponseCache c{fs::path(c_cache)};
      try {
        std::cerr << c.import_from(c_file) << " new records imported\n";
      } catch (const CacheConflict& e) {
        for (const auto& k : e.keys()) std::cerr << "conflict: " << k << "\n";
        throw;
      }
      return 0;
    }

    if (*serve) {
      if (p_token.empty())
        if (const char* env = std::getenv("TEAR_ADMIN_TOKEN")) p_token = env;
      if (p_token.empty()) throw ConfigError("serve-pref needs --admin-token or TEAR_ADMIN_TOKEN");
      SessionStore store(p_root);
      PrefServer server(store, {p_host, p_port, p_token, "*"});
      std::cerr << "serving preference sessions from " << p_root << " on " << p_host << ":" << p_port << "\n";
      server.run();
      return 0;
    }

    if (*pref_tally) {
      SessionStore store(pt_root);
      const auto w = store.win_tie_loss(pt_session);
      std::cout << w.first_system << " / tie / " << w.second_system << ": " << w.first_wins << " / " << w.ties
                << " / " << w.second_wins << "\n";
      if (!pt_archive.empty()) {
        RunArchive archive = load_run(pt_archive);
        archive.preference = preference_json(w);
        save_run(archive, pt_archive);
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "tear: " << e.what() << "\n";
    return exit_code_for(e.error_class());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "tear: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "tear: malformed JSON: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
