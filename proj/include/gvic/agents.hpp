#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gvic/errors.hpp"
#include "gvic/util.hpp"

namespace gvic {

/// One generation call. reference_responses carries the response set the
/// agent consumes this round, self first, as (agent_label, text) pairs;
/// it is empty exactly in the initial response phase (round 0).
struct GenerationRequest {
  std::string question;
  std::string system_prompt;
  std::vector<std::pair<std::string, std::string>> reference_responses;
  int round_index = 0;
  int agent_index = 0;
};

struct AgentResponse {
  std::string text;
  int agent_index = 0;
  int round_index = 0;
  std::int64_t latency_ms = 0;
  std::string backend_id;
};

/// Helpfulness/harmlessness pair, both modelling probabilities in [0, 1].
struct MockScore {
  double helpfulness = 0.0;
  double harmlessness = 0.0;
};

inline double balance_value(const MockScore& s, double alpha, double beta) {
  return alpha * s.helpfulness + beta * s.harmlessness;
}

// Balance values within this distance count as tied; merges the rounding
// noise of double sums so tie-breaking stays deterministic.
inline constexpr double kBalanceTieEpsilon = 1e-12;

/// Affine initial-score model: helpfulness falls and harmlessness rises
/// linearly with vigilance intensity.
struct AffineScoreModel {
  double h_max = 0.9;
  double h_min = 0.3;
  double s_min = 0.3;
  double s_max = 0.9;
};

inline MockScore mock_initial_score(double intensity,
                                    const AffineScoreModel& m = {}) {
  MockScore s;
  s.helpfulness = m.h_max - (m.h_max - m.h_min) * intensity;
  s.harmlessness = m.s_min + (m.s_max - m.s_min) * intensity;
  return s;
}

/// One debate-round update: move toward the best-balance response visible.
/// best_ref maximizes alpha*H + beta*S over references plus the agent's own
/// score; ties break toward highest harmlessness, then earliest candidate
/// (own first, then reference order). The balance value never decreases.
inline MockScore mock_update_score(const MockScore& own,
                                   const std::vector<MockScore>& references,
                                   double alpha, double beta, double rate) {
  MockScore best = own;
  double best_q = balance_value(own, alpha, beta);
  for (const auto& r : references) {
    double q = balance_value(r, alpha, beta);
    bool better = q > best_q + kBalanceTieEpsilon ||
                  (q > best_q - kBalanceTieEpsilon &&
                   r.harmlessness > best.harmlessness + kBalanceTieEpsilon);
    if (better) {
      best = r;
      best_q = q;
    }
  }
  MockScore out;
  out.helpfulness = own.helpfulness + rate * (best.helpfulness - own.helpfulness);
  out.harmlessness =
      own.harmlessness + rate * (best.harmlessness - own.harmlessness);
  return out;
}

// ---------------------------------------------------------------------------
// Mock response tag: scores ride inside the response text so synthesis and
// judges can read them back. Fixed format: <<gv H=<f> S=<f> vig=<f>>>
// ---------------------------------------------------------------------------

struct MockTag {
  MockScore score;
  double vigilance = 0.5;
};

inline std::string format_mock_tag(const MockScore& s, double vigilance) {
  return "<<gv H=" + format_double(s.helpfulness) +
         " S=" + format_double(s.harmlessness) +
         " vig=" + format_double(vigilance) + ">>";
}

inline std::optional<MockTag> parse_mock_tag(const std::string& text) {
  auto start = text.find("<<gv ");
  if (start == std::string::npos) return std::nullopt;
  auto end = text.find(">>", start);
  if (end == std::string::npos) return std::nullopt;
  std::string body = text.substr(start + 5, end - start - 5);
  MockTag tag;
  int fields = 0;
  size_t pos = 0;
  while (pos < body.size()) {
    size_t eq = body.find('=', pos);
    if (eq == std::string::npos) break;
    std::string key = body.substr(pos, eq - pos);
    size_t sp = body.find(' ', eq + 1);
    if (sp == std::string::npos) sp = body.size();
    std::string val = body.substr(eq + 1, sp - eq - 1);
    double v = 0.0;
    if (!parse_double(val, v)) return std::nullopt;
    if (key == "H") tag.score.helpfulness = v, ++fields;
    else if (key == "S") tag.score.harmlessness = v, ++fields;
    else if (key == "vig") tag.vigilance = v, ++fields;
    pos = sp + 1;
  }
  if (fields < 3) return std::nullopt;
  return tag;
}

/// Extracts the numeric vigilance level a rendered system prompt carries.
/// Prompts without one (the neutral/disabled arm) read as 0.5.
inline double vigilance_from_prompt(const std::string& system_prompt) {
  static const std::string needle = "vigilance level ";
  auto pos = system_prompt.find(needle);
  if (pos == std::string::npos) return 0.5;
  pos += needle.size();
  auto end = pos;
  while (end < system_prompt.size() &&
         (std::isdigit(static_cast<unsigned char>(system_prompt[end])) ||
          system_prompt[end] == '.'))
    ++end;
  double v = 0.5;
  if (!parse_double(system_prompt.substr(pos, end - pos), v)) return 0.5;
  return v;
}

/// Fixed system instruction for the synthesis aggregator call.
inline const char* aggregation_instruction() {
  return "You are the aggregator. Synthesize one final answer from the "
         "agents' responses below, maximizing usefulness while ensuring "
         "harmlessness.";
}

/// Renders the user message a chat backend sends: the question, plus the
/// referenced answers under a fixed header when present.
inline std::string format_user_message(const GenerationRequest& req) {
  std::string msg = req.question;
  if (!req.reference_responses.empty()) {
    msg += "\n\nOther agents' answers:\n";
    for (const auto& [label, text] : req.reference_responses)
      msg += label + ": " + text + "\n";
  }
  return msg;
}

// ---------------------------------------------------------------------------
// Backend contract
// ---------------------------------------------------------------------------

class Backend {
 public:
  virtual ~Backend() = default;
  /// Produces a response or throws AgentFailedError once the backend's retry
  /// policy (if any) is exhausted. Must be safe for concurrent calls.
  virtual AgentResponse generate(const GenerationRequest& request) = 0;
  virtual std::string id() const = 0;
};

/// Deterministic mock parameters. The defaults make the mock exactly the
/// affine model plus the best-balance update; the remaining knobs exist for
/// stress profiles (ablation studies) and are inert at their defaults:
///   jitter            - amplitude of per-(seed, question, agent) noise on
///                       initial scores only, so balance stays monotone.
///   attention_budget  - max peer responses an agent can actually take in
///                       per round (0 = unlimited). Oversized reference sets
///                       get subsampled deterministically.
///   diversity_floor   - scales the update rate by the vigilance spread of
///                       the consumed references: rate_eff = rate *
///                       (floor + (1-floor)*spread). 1.0 disables.
///   benign/harmful    - optional per-question-type score models; when set,
///                       a seeded hash of the question selects which applies.
struct MockParams {
  std::uint64_t seed = 0;
  AffineScoreModel model;
  double rate = 0.5;
  double alpha = 1.0;
  double beta = 1.0;
  double jitter = 0.0;
  int attention_budget = 0;
  double diversity_floor = 1.0;
  std::optional<AffineScoreModel> benign_model;
  std::optional<AffineScoreModel> harmful_model;
};

/// Pure-function mock agent. All randomness is a hash of
/// (seed, agent_index, round_index, question), so concurrent scheduling
/// cannot perturb results and identical configs replay byte-identically.
class MockBackend : public Backend {
 public:
  explicit MockBackend(MockParams params) : p_(std::move(params)) {}

  std::string id() const override { return "mock"; }

  const MockParams& params() const { return p_; }

  /// Hidden question type: true = harmful. Seed-independent so a question
  /// keeps its type across systems and seeds.
  static bool question_is_harmful(const std::string& question) {
    return (splitmix64(fnv1a64(question, fnv1a64("qtype"))) & 1) != 0;
  }

  AgentResponse generate(const GenerationRequest& req) override {
    const double vig = vigilance_from_prompt(req.system_prompt);
    const bool aggregating =
        req.system_prompt.find("You are the aggregator") != std::string::npos;
    MockScore score;
    if (req.reference_responses.empty()) {
      score = initial_score(vig, req);
    } else if (aggregating) {
      score = aggregated_score(vig, req);
    } else {
      score = updated_score(vig, req);
    }
    AgentResponse resp;
    resp.agent_index = req.agent_index;
    resp.round_index = req.round_index;
    resp.latency_ms = 0;
    resp.backend_id = id();
    if (aggregating) {
      resp.text = "Aggregated final answer. " + format_mock_tag(score, vig);
    } else {
      resp.text = "A" + std::to_string(req.agent_index + 1) + " round " +
                  std::to_string(req.round_index) +
                  (req.reference_responses.empty()
                       ? ": initial assessment. "
                       : ": revised after reviewing peers. ") +
                  format_mock_tag(score, vig);
    }
    return resp;
  }

 private:
  std::uint64_t call_hash(const GenerationRequest& req,
                          std::string_view salt) const {
    std::uint64_t h = fnv1a64(salt);
    h = fnv1a64_u64(p_.seed, h);
    h = fnv1a64_u64(static_cast<std::uint64_t>(req.agent_index), h);
    h = fnv1a64_u64(static_cast<std::uint64_t>(req.round_index), h);
    h = fnv1a64(req.question, h);
    return splitmix64(h);
  }

  const AffineScoreModel& model_for(const std::string& question) const {
    if (p_.benign_model && p_.harmful_model)
      return question_is_harmful(question) ? *p_.harmful_model
                                           : *p_.benign_model;
    return p_.model;
  }

  MockScore initial_score(double vig, const GenerationRequest& req) const {
    MockScore s = mock_initial_score(vig, model_for(req.question));
    if (p_.jitter > 0.0) {
      s.helpfulness = clamp01(
          s.helpfulness +
          (unit_interval(call_hash(req, "jitH")) * 2.0 - 1.0) * p_.jitter);
      s.harmlessness = clamp01(
          s.harmlessness +
          (unit_interval(call_hash(req, "jitS")) * 2.0 - 1.0) * p_.jitter);
    }
    return s;
  }

  MockScore updated_score(double vig, const GenerationRequest& req) const {
    // Own previous response comes back as part of the reference set (the
    // reference sets include the agent itself, listed first).
    const std::string own_label = "A" + std::to_string(req.agent_index + 1);
    std::optional<MockTag> own;
    std::vector<MockTag> peers;
    for (const auto& [label, text] : req.reference_responses) {
      auto tag = parse_mock_tag(text);
      if (!tag) continue;  // opaque non-mock text contributes nothing
      if (!own && label == own_label)
        own = *tag;
      else
        peers.push_back(*tag);
    }
    if (!own) {
      // No own history (the aggregator call, or a wiped agent): update from
      // a fresh initial score instead.
      own = MockTag{initial_score(vig, req), vig};
    }
    if (peers.empty()) return own->score;

    double rate = p_.rate;
    if (p_.attention_budget > 0 &&
        static_cast<int>(peers.size()) > p_.attention_budget) {
      // Oversized reference sets get a shallower read: a random subset is
      // attended and the whole prompt dilutes the update step.
      rate *= static_cast<double>(p_.attention_budget) /
              static_cast<double>(peers.size());
      peers = attended_subset(peers, req);
    }
    if (p_.diversity_floor < 1.0) {
      double lo = own->vigilance, hi = own->vigilance;
      for (const auto& t : peers) {
        lo = std::min(lo, t.vigilance);
        hi = std::max(hi, t.vigilance);
      }
      double spread = clamp01(hi - lo);
      rate *= p_.diversity_floor + (1.0 - p_.diversity_floor) * spread;
    }

    std::vector<MockScore> ref_scores;
    ref_scores.reserve(peers.size());
    for (const auto& t : peers) ref_scores.push_back(t.score);
    return mock_update_score(own->score, ref_scores, p_.alpha, p_.beta, rate);
  }

  // An instructed summarizer blends what it reads: the aggregate score is
  // the mean of the attended responses, so weak population tails show up in
  // the final answer instead of vanishing behind the best response.
  MockScore aggregated_score(double vig, const GenerationRequest& req) const {
    std::vector<MockTag> tags;
    for (const auto& [label, text] : req.reference_responses) {
      (void)label;
      if (auto tag = parse_mock_tag(text)) tags.push_back(*tag);
    }
    if (tags.empty()) return initial_score(vig, req);
    if (p_.attention_budget > 0 &&
        static_cast<int>(tags.size()) > p_.attention_budget)
      tags = attended_subset(tags, req);
    MockScore out{0.0, 0.0};
    for (const auto& t : tags) {
      out.helpfulness += t.score.helpfulness / tags.size();
      out.harmlessness += t.score.harmlessness / tags.size();
    }
    return out;
  }

  std::vector<MockTag> attended_subset(const std::vector<MockTag>& peers,
                                       const GenerationRequest& req) const {
    // Deterministic partial Fisher-Yates over peer positions, then restore
    // original order for stable tie-breaking downstream.
    std::vector<size_t> idx(peers.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::uint64_t h = call_hash(req, "attention");
    for (int i = 0; i < p_.attention_budget; ++i) {
      h = splitmix64(h);
      size_t j = i + static_cast<size_t>(h % (idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(p_.attention_budget);
    std::sort(idx.begin(), idx.end());
    std::vector<MockTag> out;
    out.reserve(idx.size());
    for (size_t i : idx) out.push_back(peers[i]);
    return out;
  }

  MockParams p_;
};

}  // namespace gvic
