// Python bindings. Structured values cross the boundary as JSON-shaped
// dicts and lists, in the same layout the archives use.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tear/analysis.hpp"
#include "tear/archive.hpp"
#include "tear/bleu.hpp"
#include "tear/corpus.hpp"
#include "tear/json_io.hpp"
#include "tear/mqm.hpp"
#include "tear/pipeline.hpp"
#include "tear/prompts.hpp"
#include "tear/report.hpp"
#include "tear/stats.hpp"

namespace py = pybind11;
using namespace tear;

namespace {

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_py(const py::handle& obj) {
  return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

std::vector<ErrorAnnotation> annotations_from(const py::handle& obj) {
  return from_py(obj).get<std::vector<ErrorAnnotation>>();
}

py::dict run_replay(const std::string& testset, const std::string& pair, const std::string& store,
                    const std::string& output, const py::dict& config, const std::string& strategy,
                    std::size_t parallelism, const std::string& label) {
  const TestSet ts = load_testset(testset, LanguagePair::parse(pair));
  RunOptions opts;
  if (!config.empty()) {
    json merged = RunConfig{};
    merged.update(from_py(config));
    opts.config = merged.get<RunConfig>();
  }
  opts.strategy = strategy;
  opts.parallelism = parallelism;
  opts.label = label;
  opts.paths = {{"testset", testset}, {"mode", "replay"}};
  RunArchive archive;
  {
    py::gil_scoped_release release;
    Gateway gw(GatewayMode::replay);
    gw.set_replay_store(std::make_shared<const ResponseCache>(store));
    archive = execute_run(gw, ts, opts);
    score_bleu(archive);
    save_run(archive, output);
  }
  py::dict out;
  out["summary"] = to_py(archive.summary);
  out["corpus_final"] = archive.corpus_final;
  out["corpus_initial"] = archive.corpus_initial;
  return out;
}

}  // namespace

PYBIND11_MODULE(_tear, m) {
  m.doc() = "Translate, estimate, refine: core operations";

  static py::exception<Error> base(m, "TearError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::reinterpret_borrow<py::object>(base)(e.what());
      err.attr("kind") = e.kind();
      const char* cls = e.error_class() == ErrorClass::usage ? "usage"
                        : e.error_class() == ErrorClass::data ? "data"
                                                              : "provider";
      err.attr("error_class") = cls;
      PyErr_SetObject(base.ptr(), err.ptr());
    }
  });

  m.def(
      "parse_estimation", [](const std::string& text) { return to_py(parse_estimation(text)); }, py::arg("text"),
      "Parse a raw MQM estimation into a dict with annotations and the refine flag.");
  m.def(
      "serialize_feedback",
      [](const py::handle& annotations) { return serialize_feedback(annotations_from(annotations)); },
      py::arg("annotations"));
  m.def(
      "mqm_score",
      [](const py::handle& annotations, double critical, double major, double minor, std::optional<double> cap) {
        const auto s = mqm_score(annotations_from(annotations), {critical, major, minor}, cap);
        py::dict out;
        out["value"] = s.value;
        out["capped"] = s.capped;
        return out;
      },
      py::arg("annotations"), py::arg("critical") = 25.0, py::arg("major") = 5.0, py::arg("minor") = 1.0,
      py::arg("cap") = py::none());

  m.def(
      "translate_prompt",
      [](const std::string& source, const std::string& pair, int shots, std::int64_t seed) {
        const LanguagePair lp = LanguagePair::parse(pair);
        const Segment seg{"0", lp, source, std::nullopt, std::nullopt};
        std::optional<ExemplarSet> ex;
        if (shots > 0) ex = select_exemplars(builtin_exemplar_pool(lp), lp, static_cast<std::size_t>(shots), seed);
        return build_translate_prompt(seg, ex).text;
      },
      py::arg("source"), py::arg("pair"), py::arg("shots") = 0, py::arg("seed") = 0);
  m.def(
      "estimate_prompt",
      [](const std::string& source, const std::string& translation, const std::string& pair, int shots) {
        return build_estimate_prompt(source, translation, LanguagePair::parse(pair), shots).text;
      },
      py::arg("source"), py::arg("translation"), py::arg("pair"), py::arg("shots") = 3);
  m.def(
      "refine_prompt",
      [](const std::string& source, const std::string& initial, const std::string& feedback,
         const std::string& pair) {
        return build_refine_prompt(RefineVariant::alpha, source, initial, feedback, LanguagePair::parse(pair),
                                   std::nullopt)
            .text;
      },
      py::arg("source"), py::arg("initial"), py::arg("feedback"), py::arg("pair"));

  m.def(
      "corpus_bleu",
      [](const std::vector<std::string>& hyps, const std::vector<std::string>& refs, const std::string& smooth,
         bool lowercase, const std::string& tokenize) {
        BleuOptions o;
        o.smooth = parse_bleu_smooth(smooth);
        o.lowercase = lowercase;
        if (tokenize == "none") o.tokenize = BleuTokenize::none;
        else if (tokenize != "13a") throw ConfigError("unknown tokenizer " + tokenize);
        BleuResult r;
        {
          py::gil_scoped_release release;
          r = corpus_bleu(hyps, refs, o);
        }
        py::dict out;
        out["score"] = r.score;
        out["precisions"] = r.precisions;
        out["brevity_penalty"] = r.brevity_penalty;
        out["sys_len"] = r.sys_len;
        out["ref_len"] = r.ref_len;
        out["signature"] = r.signature;
        return out;
      },
      py::arg("hypotheses"), py::arg("references"), py::arg("smooth") = "none", py::arg("lowercase") = false,
      py::arg("tokenize") = "13a");
  m.def("tokenize_13a", &tokenize_13a, py::arg("line"));

  m.def(
      "kendall_tau",
      [](const std::vector<double>& a, const std::vector<double>& b, const std::string& variant) {
        return kendall_tau(a, b, parse_kendall_variant(variant));
      },
      py::arg("a"), py::arg("b"), py::arg("variant") = "b");
  m.def(
      "pairwise_accuracy",
      [](const std::vector<double>& metric, const std::vector<double>& human) {
        return pairwise_accuracy(metric, human);
      },
      py::arg("metric"), py::arg("human"));

  m.def(
      "win_tie_loss",
      [](const py::handle& judgments, const std::map<std::string, std::string>& side_map, const std::string& first,
         const std::string& second) {
        const auto w = win_tie_loss(from_py(judgments).get<std::vector<PreferenceJudgment>>(), side_map, first,
                                    second);
        py::dict out;
        out["first_wins"] = w.first_wins;
        out["ties"] = w.ties;
        out["second_wins"] = w.second_wins;
        return out;
      },
      py::arg("judgments"), py::arg("side_map"), py::arg("first_system"), py::arg("second_system"));

  m.def(
      "load_testset",
      [](const std::string& path, const std::string& pair) {
        const auto ts = load_testset(path, LanguagePair::parse(pair));
        py::list out;
        for (const auto& s : ts.segments) out.append(to_py(s));
        return out;
      },
      py::arg("path"), py::arg("pair"));

  m.def("run_replay", &run_replay, py::arg("testset"), py::arg("pair"), py::arg("store"), py::arg("output"),
        py::arg("config") = py::dict(), py::arg("strategy") = "tear", py::arg("parallelism") = 1,
        py::arg("label") = "",
        "Run the pipeline against a frozen response cache and write a run archive.");

  m.def(
      "render_report",
      [](const std::vector<std::string>& archive_dirs, const std::string& kind, const std::string& format) {
        std::vector<RunArchive> archives;
        for (const auto& d : archive_dirs) archives.push_back(load_run(d));
        const auto t = render_report(archives, parse_report_kind(kind));
        if (format == "tsv") return t.to_tsv();
        if (format != "text") throw ConfigError("format must be text or tsv");
        return t.to_text();
      },
      py::arg("archives"), py::arg("kind"), py::arg("format") = "text");
}
