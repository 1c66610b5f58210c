#pragma once

#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gvic/evaluation.hpp"

namespace gvic {

inline int percent_of(int part, int total) {
  if (total == 0) return 0;
  return static_cast<int>(std::lround(100.0 * part / total));
}

inline std::string dwl_percent(double d_wl) {
  return std::to_string(static_cast<int>(std::lround(d_wl * 100.0))) + "%";
}

/// One table row: W(%), T(%), L(%), D_WL, percentages rounded to integers.
struct ReportRow {
  std::string label;
  int w_pct = 0;
  int t_pct = 0;
  int l_pct = 0;
  std::string d_wl;
};

inline ReportRow make_row(const std::string& label, const EvalReport& r) {
  int judged = r.wins + r.ties + r.losses;
  return ReportRow{label, percent_of(r.wins, judged), percent_of(r.ties, judged),
                   percent_of(r.losses, judged), dwl_percent(r.d_wl)};
}

inline std::string render_table(const std::vector<ReportRow>& rows) {
  size_t label_w = 10;
  for (const auto& r : rows) label_w = std::max(label_w, r.label.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(label_w) + 2) << "comparison"
      << std::right << std::setw(6) << "W(%)" << std::setw(6) << "T(%)"
      << std::setw(6) << "L(%)" << std::setw(8) << "D_WL" << "\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(static_cast<int>(label_w) + 2) << r.label
        << std::right << std::setw(6) << r.w_pct << std::setw(6) << r.t_pct
        << std::setw(6) << r.l_pct << std::setw(8) << r.d_wl << "\n";
  }
  return out.str();
}

/// CSV twin of the text table; same columns, same values.
inline std::string render_csv(const std::vector<ReportRow>& rows) {
  std::string out = "comparison,W(%),T(%),L(%),D_WL\n";
  for (const auto& r : rows)
    out += r.label + "," + std::to_string(r.w_pct) + "," +
           std::to_string(r.t_pct) + "," + std::to_string(r.l_pct) + "," +
           r.d_wl + "\n";
  return out;
}

/// Per-question verdict CSV: question_id, verdict_ab, verdict_ba, reconciled.
inline std::string render_verdict_csv(const std::vector<JudgeVerdict>& verdicts) {
  std::string out = "question_id,verdict_ab,verdict_ba,reconciled\n";
  for (const auto& v : verdicts) {
    if (v.skipped) {
      out += v.question_id + ",skipped,skipped,skipped\n";
    } else {
      out += v.question_id + "," + to_string(v.verdict_ab) + "," +
             to_string(v.verdict_ba) + "," + to_string(v.reconciled) + "\n";
    }
  }
  return out;
}

inline std::string ablation_label(const AblationCell& cell) {
  std::string label = cell.gradual_vigilance ? "GV+" : "   ";
  switch (cell.kind) {
    case TopologyKind::FullyConnected: label += "FC"; break;
    case TopologyKind::Neighbor: label += "NC"; break;
    case TopologyKind::Interval: label += "IC"; break;
  }
  return label;
}

inline std::vector<ReportRow> ablation_rows(const std::vector<AblationCell>& grid) {
  std::vector<ReportRow> rows;
  rows.reserve(grid.size());
  for (const auto& cell : grid)
    rows.push_back(make_row(ablation_label(cell), cell.report));
  return rows;
}

}  // namespace gvic
