#pragma once

#include <string>
#include <vector>

#include "tear/analysis.hpp"
#include "tear/archive.hpp"

namespace tear {

enum class ReportKind { ablation, error_type, cnm_cu, meta_eval, preference };
std::string to_string(ReportKind k);
ReportKind parse_report_kind(std::string_view s);

struct ReportTable {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  // Space-aligned columns under a title line.
  std::string to_text() const;
  // Header row plus one line per row, tab-separated.
  std::string to_tsv() const;
};

// Error types shown as columns of the error_type report, in display order.
const std::vector<std::string>& error_type_columns();

// One table over one or more archives. MissingInputs names whatever the
// requested kind needs but the archives lack.
//  ablation:   one row per archive; the IT row comes from an it_only archive
//              if present, else from the first archive's initial-translation
//              scores. Neural metrics are shown x100.
//  error_type: COMET delta (x100) per estimated error type, "/" when no
//              segment reported that type.
//  cnm_cu:     CN / CM / CU and execution rate per archive.
//  meta_eval:  pairwise accuracy and Kendall variants stored by `meta-eval`.
//  preference: "first / tie / second" counts stored with the archive.
ReportTable render_report(const std::vector<RunArchive>& archives, ReportKind kind);

// Shape of the preference payload attached to an archive.
json preference_json(const WinTieLoss& tally);
WinTieLoss preference_from_json(const json& j);

}  // namespace tear
