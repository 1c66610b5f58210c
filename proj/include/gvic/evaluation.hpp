#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gvic/engine.hpp"
#include "gvic/errors.hpp"
#include "gvic/judge.hpp"

namespace gvic {

/// Win-Loss Differential Index: (W - L) / (W + T + L), in [-1, 1].
/// Swapping wins and losses negates it.
inline double compute_dwl(int wins, int ties, int losses) {
  if (wins < 0 || ties < 0 || losses < 0)
    throw InvalidConfigError("verdict counts must be nonnegative");
  int total = wins + ties + losses;
  if (total == 0)
    throw EmptyEvaluationError("no judged questions: D_WL undefined");
  return static_cast<double>(wins - losses) / static_cast<double>(total);
}

struct EvalReport {
  int wins = 0;
  int ties = 0;
  int losses = 0;
  int skipped = 0;
  double d_wl = 0.0;
  std::vector<JudgeVerdict> per_question;
  std::string fingerprint_a;
  std::string fingerprint_b;
};

/// Judges system A against system B over aligned answer sets and aggregates
/// the reconciled verdicts. Questions whose judge calls fail are skipped and
/// never enter the denominators.
inline EvalReport run_pairwise_eval(
    const std::vector<std::pair<std::string, std::string>>& questions,
    const std::map<std::string, std::string>& answers_a,
    const std::map<std::string, std::string>& answers_b, Judge& judge) {
  EvalReport report;
  for (const auto& [qid, qtext] : questions) {
    auto ita = answers_a.find(qid);
    auto itb = answers_b.find(qid);
    if (ita == answers_a.end() || itb == answers_b.end())
      throw MismatchedAnswerSetsError("question " + qid +
                                      " missing from one answer set");
    JudgeVerdict v;
    try {
      v = judge_pair(qid, qtext, ita->second, itb->second, judge);
    } catch (const JudgeFailedError& e) {
      v.question_id = qid;
      v.skipped = true;
      v.error = e.what();
      ++report.skipped;
      report.per_question.push_back(std::move(v));
      continue;
    }
    switch (v.reconciled) {
      case Outcome::Win: ++report.wins; break;
      case Outcome::Tie: ++report.ties; break;
      case Outcome::Loss: ++report.losses; break;
    }
    report.per_question.push_back(std::move(v));
  }
  report.d_wl = compute_dwl(report.wins, report.ties, report.losses);
  return report;
}

// --- ablation grid -----------------------------------------------------------

struct AblationCell {
  bool gradual_vigilance = false;
  TopologyKind kind = TopologyKind::FullyConnected;
  EvalReport report;
};

/// Mock stress profile for ablation runs. The defaults of MockParams are
/// deliberately inert; this profile turns on the effects that make the
/// communication structure observable at desk scale:
///  - per-question score models split by hidden question type, so the ladder
///    ends matter (a benign question rewards the trusting end, a harmful one
///    the cautious end);
///  - initial-score jitter, so outcomes vary per question and seed;
///  - a peer attention budget, so oversized fully-connected reference sets
///    lose information;
///  - diversity-scaled update rate, so reference sets spanning distant
///    vigilance levels converge faster than same-level ones.
inline MockParams ablation_mock_profile() {
  MockParams p;
  p.rate = 0.75;
  p.jitter = 0.12;
  p.attention_budget = 2;
  p.diversity_floor = 0.20;
  p.benign_model = AffineScoreModel{0.95, 0.40, 0.70, 0.92};
  p.harmful_model = AffineScoreModel{0.75, 0.35, 0.05, 0.95};
  return p;
}

/// Runs the six-cell grid {GV off/on} x {FC, NC, IC}, each compared pairwise
/// against a single neutral agent on the same questions, pooled over the
/// given seeds. Row order matches the ablation table: GV off first.
inline std::vector<AblationCell> run_ablation_grid(
    const std::vector<std::pair<std::string, std::string>>& questions,
    const DebateConfig& base_config, Judge& judge,
    const std::vector<std::uint64_t>& seeds) {
  if (questions.empty()) throw EmptyDatasetError("ablation needs questions");
  if (seeds.empty()) throw InvalidConfigError("ablation needs seeds");

  const TopologyKind kinds[] = {TopologyKind::FullyConnected,
                                TopologyKind::Neighbor, TopologyKind::Interval};
  std::vector<AblationCell> grid;
  for (int gv = 0; gv <= 1; ++gv)
    for (auto kind : kinds)
      grid.push_back({gv == 1, kind, {}});

  for (auto& cell : grid) {
    DebateConfig debate_cfg = base_config;
    debate_cfg.topology = cell.kind;
    debate_cfg.vigilance_enabled = cell.gradual_vigilance;

    DebateConfig single_cfg = base_config;
    single_cfg.n_agents = 1;
    single_cfg.rounds = 0;
    single_cfg.vigilance_enabled = false;
    single_cfg.synthesis = SynthesisMode::ScoredArgmax;

    EvalReport pooled;
    pooled.fingerprint_a = fingerprint(debate_cfg);
    pooled.fingerprint_b = fingerprint(single_cfg);
    for (auto seed : seeds) {
      DebateConfig dc = debate_cfg;
      dc.seed = seed;
      DebateConfig sc = single_cfg;
      sc.seed = seed;
      std::map<std::string, std::string> debate_answers, single_answers;
      for (const auto& [qid, qtext] : questions) {
        debate_answers[qid] = run_debate(qtext, qid, dc).final_answer;
        single_answers[qid] = run_debate(qtext, qid, sc).final_answer;
      }
      EvalReport r =
          run_pairwise_eval(questions, debate_answers, single_answers, judge);
      pooled.wins += r.wins;
      pooled.ties += r.ties;
      pooled.losses += r.losses;
      pooled.skipped += r.skipped;
      for (auto& v : r.per_question) {
        v.question_id = "s" + std::to_string(seed) + ":" + v.question_id;
        pooled.per_question.push_back(std::move(v));
      }
    }
    pooled.d_wl = compute_dwl(pooled.wins, pooled.ties, pooled.losses);
    cell.report = std::move(pooled);
  }
  return grid;
}

}  // namespace gvic
