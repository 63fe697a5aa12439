#include "tear/report.hpp"

#include <algorithm>

#include "tear/errors.hpp"
#include "tear/util.hpp"

namespace tear {

namespace {

struct MetricColumn {
  const char* key;
  const char* title;
  double scale;
};

constexpr MetricColumn kAblationMetrics[] = {
    {"bleu", "BLEU", 1.0}, {"comet22", "COMET", 100.0}, {"cometkiwi", "COMETKiwi", 100.0}, {"bleurt20", "BLEURT", 100.0}};

std::string row_label(const RunArchive& a) {
  if (!a.manifest.label.empty()) return a.manifest.label;
  return a.manifest.strategy + " " + a.manifest.pair.tag();
}

std::string signed_delta(double d) {
  std::string s = format_fixed(d, 2, true);
  return s == "+0.00" ? "0.00" : s;
}

ReportTable ablation(const std::vector<RunArchive>& archives) {
  const RunArchive* it = nullptr;
  for (const auto& a : archives)
    if (a.manifest.strategy == "it_only") {
      it = &a;
      break;
    }
  const auto& baseline = it ? it->corpus_final : archives.front().corpus_initial;

  std::vector<MetricColumn> cols;
  for (const auto& m : kAblationMetrics) {
    bool any = false;
    for (const auto& a : archives) any = any || a.corpus_final.count(m.key);
    if (!any) continue;
    if (!baseline.count(m.key)) throw MissingInputs(std::string("IT baseline lacks corpus ") + m.key + " score");
    for (const auto& a : archives)
      if (!a.corpus_final.count(m.key))
        throw MissingInputs("archive '" + row_label(a) + "' lacks corpus " + m.key + " score");
    cols.push_back(m);
  }
  if (cols.empty()) throw MissingInputs("no corpus scores in any archive (run `tear score` first)");

  ReportTable t;
  t.title = "Ablation (" + archives.front().manifest.pair.tag() + ")";
  t.columns.push_back("Variant");
  for (const auto& c : cols) t.columns.push_back(c.title);

  std::vector<std::string> it_row{"IT"};
  for (const auto& c : cols) it_row.push_back(format_fixed(baseline.at(c.key) * c.scale));
  t.rows.push_back(it_row);
  for (const auto& a : archives) {
    if (&a == it) continue;
    std::vector<std::string> row{row_label(a)};
    for (const auto& c : cols) {
      const double v = a.corpus_final.at(c.key) * c.scale;
      const double base = baseline.at(c.key) * c.scale;
      row.push_back(format_fixed(v) + " (" + signed_delta(v - base) + ")");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

ReportTable error_type(const std::vector<RunArchive>& archives) {
  ReportTable t;
  t.title = "COMET change by estimated error type";
  t.columns.push_back("Run");
  for (const auto& c : error_type_columns()) t.columns.push_back(c);
  for (const auto& a : archives) {
    std::map<std::string, double> before, after;
    std::map<std::string, EstimationResult> est;
    for (const auto& r : a.records) {
      if (r.estimations.empty()) continue;
      auto s = a.scores.find(r.segment_id);
      if (s == a.scores.end() || !s->second.initial.count("comet22") || !s->second.final.count("comet22"))
        throw MissingInputs("archive '" + row_label(a) + "' lacks comet22 scores for segment " + r.segment_id);
      before[r.segment_id] = s->second.initial.at("comet22") * 100.0;
      after[r.segment_id] = s->second.final.at("comet22") * 100.0;
      est[r.segment_id] = r.estimations.front();
    }
    if (est.empty()) throw MissingInputs("archive '" + row_label(a) + "' has no estimations");
    const auto buckets = delta_by_error_type(before, after, est);
    std::vector<std::string> row{row_label(a)};
    for (const auto& c : error_type_columns()) {
      auto b = buckets.find(c);
      row.push_back(b == buckets.end() ? "/" : signed_delta(b->second.mean_delta));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

ReportTable cnm_cu(const std::vector<RunArchive>& archives) {
  ReportTable t;
  t.title = "Correction statistics";
  t.columns = {"Run", "Pair", "CN", "CM", "CU", "Execution rate (%)"};
  for (const auto& a : archives) {
    const auto& s = a.summary;
    t.rows.push_back({row_label(a), a.manifest.pair.tag(), std::to_string(s.cn), std::to_string(s.cm),
                      std::to_string(s.cu), format_fixed(s.execution_rate * 100.0)});
  }
  return t;
}

ReportTable meta_eval(const std::vector<RunArchive>& archives) {
  ReportTable t;
  t.title = "Metric meta-evaluation against human MQM";
  t.columns = {"Metric", "Pair", "Systems", "Pairwise acc.", "tau_a", "tau_b", "tau_c", "tau avg"};
  auto cell = [](const json& row, const char* key) -> std::string {
    if (!row.contains(key) || row[key].is_null()) return "undefined";
    return format_fixed(row[key].get<double>(), 4);
  };
  for (const auto& a : archives) {
    if (!a.meta_eval) throw MissingInputs("archive '" + row_label(a) + "' has no meta-evaluation results");
    const std::string metric = a.meta_eval->value("metric", "");
    for (const auto& row : a.meta_eval->value("pairs", json::array()))
      t.rows.push_back({metric, row.value("pair", ""), std::to_string(row.value("systems", 0)),
                        cell(row, "pairwise_accuracy"), cell(row, "kendall_tau_a"), cell(row, "kendall_tau_b"),
                        cell(row, "kendall_tau_c"), cell(row, "kendall_average")});
  }
  return t;
}

ReportTable preference(const std::vector<RunArchive>& archives) {
  ReportTable t;
  t.title = "Human preference";
  t.columns = {"Comparison", "First wins / Tie / Second wins"};
  for (const auto& a : archives) {
    if (!a.preference) throw MissingInputs("archive '" + row_label(a) + "' has no preference tally");
    const auto w = preference_from_json(*a.preference);
    t.rows.push_back({w.first_system + " vs " + w.second_system, std::to_string(w.first_wins) + " / " +
                                                                     std::to_string(w.ties) + " / " +
                                                                     std::to_string(w.second_wins)});
  }
  return t;
}

}  // namespace

std::string to_string(ReportKind k) {
  switch (k) {
    case ReportKind::ablation: return "ablation";
    case ReportKind::error_type: return "error_type";
    case ReportKind::cnm_cu: return "cnm_cu";
    case ReportKind::meta_eval: return "meta_eval";
    case ReportKind::preference: return "preference";
  }
  return "ablation";
}

ReportKind parse_report_kind(std::string_view s) {
  for (auto k : {ReportKind::ablation, ReportKind::error_type, ReportKind::cnm_cu, ReportKind::meta_eval,
                 ReportKind::preference}) {
    std::string name = to_string(k);
    std::string dashed = name;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    if (s == name || s == dashed) return k;
  }
  throw ConfigError("unknown report kind '" + std::string(s) + "'");
}

const std::vector<std::string>& error_type_columns() {
  static const std::vector<std::string> cols{"accuracy/mistranslation", "accuracy/omission",
                                             "accuracy/untranslated_text", "accuracy/addition",
                                             "style/awkward", "fluency/grammar",
                                             "terminology/inappropriate_for_context", "locale_convention/name"};
  return cols;
}

std::string ReportTable::to_text() const {
  std::vector<std::size_t> width(columns.size(), 0);
  auto display_width = [](const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
  };
  for (std::size_t i = 0; i < columns.size(); ++i) width[i] = display_width(columns[i]);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], display_width(r[i]));
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += "  ";
      out += cells[i];
      if (i + 1 < cells.size()) out.append(width[i] - display_width(cells[i]), ' ');
    }
    return out + "\n";
  };
  std::string out = title + "\n" + line(columns);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string ReportTable::to_tsv() const {
  auto line = [](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "\t" : "") + cells[i];
    return out + "\n";
  };
  std::string out = line(columns);
  for (const auto& r : rows) out += line(r);
  return out;
}

ReportTable render_report(const std::vector<RunArchive>& archives, ReportKind kind) {
  if (archives.empty()) throw MissingInputs("no run archives given");
  switch (kind) {
    case ReportKind::ablation: return ablation(archives);
    case ReportKind::error_type: return error_type(archives);
    case ReportKind::cnm_cu: return cnm_cu(archives);
    case ReportKind::meta_eval: return meta_eval(archives);
    case ReportKind::preference: return preference(archives);
  }
  throw ConfigError("unknown report kind");
}

json preference_json(const WinTieLoss& w) {
  return json{{"first_system", w.first_system}, {"second_system", w.second_system},
              {"first_wins", w.first_wins},     {"ties", w.ties},
              {"second_wins", w.second_wins}};
}

WinTieLoss preference_from_json(const json& j) {
  WinTieLoss w;
  try {
    w.first_system = j.at("first_system").get<std::string>();
    w.second_system = j.at("second_system").get<std::string>();
    w.first_wins = j.at("first_wins").get<std::size_t>();
    w.ties = j.at("ties").get<std::size_t>();
    w.second_wins = j.at("second_wins").get<std::size_t>();
  } catch (const json::exception& e) {
    throw MissingInputs(std::string("malformed preference tally: ") + e.what());
  }
  return w;
}

}  // namespace tear
