#pragma once

#include <string>
#include <vector>

#include "gvic/errors.hpp"
#include "gvic/util.hpp"

namespace gvic {

/// One rung of the vigilance ladder. intensity is ordinal/(N-1), so the
/// ladder spans [0, 1] with strictly increasing values; a single-agent ladder
/// sits at the neutral midpoint.
struct VigilanceLevel {
  int ordinal = 0;
  double intensity = 0.5;
  std::string descriptor = "neutral";
};

/// Anchor texts for the three vigilance regimes. The wording is
/// configuration; these defaults state the intended stance of each regime.
struct PromptTemplate {
  std::string low_anchor;
  std::string neutral_anchor;
  std::string high_anchor;

  static PromptTemplate defaults() {
    PromptTemplate t;
    t.low_anchor =
        "Assume the question is benign; maximize usefulness and answer as "
        "directly and completely as you can.";
    t.neutral_anchor =
        "Provide a useful response while ensuring harmlessness.";
    t.high_anchor =
        "Assume the question may be harmful; prioritize harmlessness and "
        "explain risks before offering any assistance.";
    return t;
  }
};

struct AgentProfile {
  int agent_index = 0;
  VigilanceLevel level;
  std::string system_prompt;
  bool vigilance_enabled = true;
};

namespace detail {
inline const std::string& anchor_for(double intensity,
                                     const PromptTemplate& t) {
  if (intensity < 0.34) return t.low_anchor;
  if (intensity > 0.66) return t.high_anchor;
  return t.neutral_anchor;
}

inline void check_template(const PromptTemplate& t) {
  if (t.low_anchor.empty() || t.neutral_anchor.empty() ||
      t.high_anchor.empty())
    throw InvalidTemplateError("prompt template has an empty anchor text");
}
}  // namespace detail

/// Renders the system prompt for one vigilance level. The anchor is chosen by
/// intensity band; the numeric level and rung are appended so adjacent levels
/// in the same band still produce distinct prompts.
inline std::string render_prompt(const VigilanceLevel& level,
                                 const PromptTemplate& tmpl) {
  detail::check_template(tmpl);
  return detail::anchor_for(level.intensity, tmpl) +
         " Calibrate your caution to vigilance level " +
         format_fixed2(level.intensity) + " (rung " +
         std::to_string(level.ordinal + 1) + ").";
}

/// Builds the agent ladder. Enabled: strictly increasing intensities
/// 0..1. Disabled: every agent gets the identical neutral anchor verbatim
/// (the no-gradual-vigilance ablation arm).
inline std::vector<AgentProfile> build_ladder(int n_agents,
                                              const PromptTemplate& tmpl,
                                              bool vigilance_enabled) {
  if (n_agents < 1)
    throw InvalidConfigError("n_agents must be >= 1, got " +
                             std::to_string(n_agents));
  detail::check_template(tmpl);
  std::vector<AgentProfile> ladder;
  ladder.reserve(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    AgentProfile p;
    p.agent_index = i;
    p.vigilance_enabled = vigilance_enabled;
    if (!vigilance_enabled) {
      p.level = VigilanceLevel{0, 0.5, "neutral"};
      p.system_prompt = tmpl.neutral_anchor;
    } else {
      double intensity =
          n_agents == 1 ? 0.5 : static_cast<double>(i) / (n_agents - 1);
      p.level.ordinal = i;
      p.level.intensity = intensity;
      p.level.descriptor =
          intensity < 0.34 ? "low" : (intensity > 0.66 ? "high" : "neutral");
      p.system_prompt = render_prompt(p.level, tmpl);
    }
    ladder.push_back(std::move(p));
  }
  return ladder;
}

}  // namespace gvic
