#include "gvic/agents.hpp"

#include <gtest/gtest.h>

#include "gvic/vigilance.hpp"

namespace gvic {
namespace {

TEST(MockInitialScore, AffineEndpointsAndMidpoint) {
  auto lo = mock_initial_score(0.0);
  EXPECT_DOUBLE_EQ(lo.helpfulness, 0.9);
  EXPECT_DOUBLE_EQ(lo.harmlessness, 0.3);

  auto hi = mock_initial_score(1.0);
  EXPECT_DOUBLE_EQ(hi.helpfulness, 0.3);
  EXPECT_DOUBLE_EQ(hi.harmlessness, 0.9);

  auto mid = mock_initial_score(0.5);
  EXPECT_DOUBLE_EQ(mid.helpfulness, 0.6);
  EXPECT_DOUBLE_EQ(mid.harmlessness, 0.6);
}

TEST(MockUpdateScore, TieBreaksTowardHarmlessnessThenMovesHalfway) {
  // All three candidates tie at Q = 1.2; the most harmless one wins the tie
  // and the update moves halfway toward it.
  MockScore own{0.9, 0.3};
  std::vector<MockScore> refs{{0.3, 0.9}, {0.6, 0.6}};
  auto out = mock_update_score(own, refs, 1.0, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(out.helpfulness, 0.6);
  EXPECT_DOUBLE_EQ(out.harmlessness, 0.6);
}

TEST(MockUpdateScore, OwnBestIsAFixedPoint) {
  MockScore own{0.8, 0.8};
  std::vector<MockScore> refs{{0.3, 0.9}, {0.6, 0.6}};
  auto out = mock_update_score(own, refs, 1.0, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(out.helpfulness, 0.8);
  EXPECT_DOUBLE_EQ(out.harmlessness, 0.8);
}

TEST(MockUpdateScore, FullRateStepsOntoBetterReference) {
  MockScore own{0.5, 0.5};
  std::vector<MockScore> refs{{0.9, 0.5}};
  auto out = mock_update_score(own, refs, 1.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(out.helpfulness, 0.9);
  EXPECT_DOUBLE_EQ(out.harmlessness, 0.5);
}

TEST(MockUpdateScore, BalanceNeverDecreases) {
  // Deterministic sweep over a grid of own/reference scores and rates.
  for (int oh = 0; oh <= 4; ++oh)
    for (int os = 0; os <= 4; ++os)
      for (int rh = 0; rh <= 4; ++rh)
        for (int rs = 0; rs <= 4; ++rs)
          for (double rate : {0.25, 0.5, 1.0}) {
            MockScore own{oh / 4.0, os / 4.0};
            std::vector<MockScore> refs{{rh / 4.0, rs / 4.0}};
            auto out = mock_update_score(own, refs, 1.0, 1.5, rate);
            EXPECT_GE(balance_value(out, 1.0, 1.5),
                      balance_value(own, 1.0, 1.5) - 1e-12);
          }
}

TEST(MockTag, RoundTripsScores) {
  for (double h : {0.0, 0.3, 0.6375, 1.0})
    for (double s : {0.1, 0.5, 0.9}) {
      auto text = "some response " + format_mock_tag({h, s}, 0.25) + " trailing";
      auto tag = parse_mock_tag(text);
      ASSERT_TRUE(tag.has_value());
      EXPECT_EQ(tag->score.helpfulness, h);
      EXPECT_EQ(tag->score.harmlessness, s);
      EXPECT_EQ(tag->vigilance, 0.25);
    }
  EXPECT_FALSE(parse_mock_tag("no tag here").has_value());
  EXPECT_FALSE(parse_mock_tag("<<gv H=1 S=>>").has_value());
}

TEST(VigilanceFromPrompt, ReadsRenderedLevels) {
  auto tmpl = PromptTemplate::defaults();
  EXPECT_DOUBLE_EQ(vigilance_from_prompt(render_prompt({0, 0.0, "low"}, tmpl)),
                   0.0);
  EXPECT_DOUBLE_EQ(vigilance_from_prompt(render_prompt({3, 0.75, "high"}, tmpl)),
                   0.75);
  EXPECT_DOUBLE_EQ(vigilance_from_prompt(tmpl.neutral_anchor), 0.5);
}

GenerationRequest initial_request(int agent, const std::string& question,
                                  double intensity) {
  GenerationRequest req;
  req.question = question;
  req.agent_index = agent;
  req.round_index = 0;
  req.system_prompt =
      render_prompt({agent, intensity, "x"}, PromptTemplate::defaults());
  return req;
}

TEST(MockBackend, InitialResponseEmbedsTheAffineScore) {
  MockParams p;
  p.seed = 7;
  MockBackend backend(p);
  auto resp = backend.generate(initial_request(0, "Q1", 0.0));
  auto tag = parse_mock_tag(resp.text);
  ASSERT_TRUE(tag.has_value());
  EXPECT_DOUBLE_EQ(tag->score.helpfulness, 0.9);
  EXPECT_DOUBLE_EQ(tag->score.harmlessness, 0.3);
  EXPECT_EQ(resp.backend_id, "mock");
  EXPECT_EQ(resp.latency_ms, 0);
}

TEST(MockBackend, UpdateMovesTowardBestBalanceReference) {
  MockParams p;
  p.seed = 7;
  MockBackend backend(p);
  GenerationRequest req = initial_request(0, "Q1", 0.0);
  req.round_index = 1;
  // Own previous response first (reference sets include the agent itself).
  req.reference_responses = {
      {"A1", "prev " + format_mock_tag({0.9, 0.3}, 0.0)},
      {"A3", "peer " + format_mock_tag({0.3, 0.9}, 0.5)},
      {"A5", "peer " + format_mock_tag({0.6, 0.6}, 1.0)},
  };
  auto tag = parse_mock_tag(backend.generate(req).text);
  ASSERT_TRUE(tag.has_value());
  // Hand-evaluated: ties at Q=1.2 break toward (0.3, 0.9); half step.
  EXPECT_DOUBLE_EQ(tag->score.helpfulness, 0.6);
  EXPECT_DOUBLE_EQ(tag->score.harmlessness, 0.6);
}

TEST(MockBackend, ByteDeterministicAcrossInstances) {
  MockParams p;
  p.seed = 42;
  p.jitter = 0.1;
  MockBackend a(p), b(p);
  for (int agent = 0; agent < 5; ++agent) {
    auto req = initial_request(agent, "some question", agent / 4.0);
    EXPECT_EQ(a.generate(req).text, b.generate(req).text);
  }
}

TEST(MockBackend, JitterKeysOnSeedAgentRoundAndQuestion) {
  MockParams p;
  p.seed = 1;
  p.jitter = 0.1;
  MockBackend backend(p);
  MockParams p2 = p;
  p2.seed = 2;
  MockBackend other_seed(p2);
  auto req = initial_request(0, "Q1", 0.5);
  auto base = parse_mock_tag(backend.generate(req).text)->score;
  auto diff_seed = parse_mock_tag(other_seed.generate(req).text)->score;
  EXPECT_NE(base.helpfulness, diff_seed.helpfulness);
  auto req2 = initial_request(0, "Q2", 0.5);
  auto diff_q = parse_mock_tag(backend.generate(req2).text)->score;
  EXPECT_NE(base.helpfulness, diff_q.helpfulness);
}

TEST(MockBackend, LadderRealizesOpposedMonotoneScores) {
  // At round 0, helpfulness strictly falls and harmlessness strictly rises
  // with the agent index, for every ladder size up to 64.
  MockParams p;
  p.seed = 7;
  MockBackend backend(p);
  auto tmpl = PromptTemplate::defaults();
  for (int n : {2, 5, 17, 64}) {
    auto ladder = build_ladder(n, tmpl, true);
    double prev_h = 2.0, prev_s = -1.0;
    for (int k = 0; k < n; ++k) {
      GenerationRequest req;
      req.question = "Q";
      req.agent_index = k;
      req.system_prompt = ladder[k].system_prompt;
      auto tag = parse_mock_tag(backend.generate(req).text);
      ASSERT_TRUE(tag.has_value());
      EXPECT_LT(tag->score.helpfulness, prev_h) << "n=" << n << " k=" << k;
      EXPECT_GT(tag->score.harmlessness, prev_s) << "n=" << n << " k=" << k;
      prev_h = tag->score.helpfulness;
      prev_s = tag->score.harmlessness;
    }
  }
}

TEST(MockBackend, AttentionBudgetSubsamplesAndDilutesTheUpdate) {
  MockParams p;
  p.seed = 7;
  p.attention_budget = 1;
  p.rate = 1.0;
  MockBackend backend(p);
  GenerationRequest req = initial_request(0, "Q1", 0.0);
  req.round_index = 1;
  req.reference_responses = {
      {"A1", format_mock_tag({0.5, 0.5}, 0.0)},
      {"A2", format_mock_tag({0.9, 0.9}, 0.25)},
      {"A3", format_mock_tag({0.8, 0.8}, 0.5)},
  };
  auto tag = parse_mock_tag(backend.generate(req).text);
  ASSERT_TRUE(tag.has_value());
  // One of two peers attended; the oversized prompt halves the step:
  // 0.5 + 0.5*(0.9-0.5) = 0.7 if A2 was read, 0.65 if A3 was.
  bool took_a2 = tag->score.helpfulness == 0.7;
  bool took_a3 = tag->score.helpfulness == 0.65;
  EXPECT_TRUE(took_a2 || took_a3) << tag->score.helpfulness;
  // Deterministic: same call, same choice.
  auto again = parse_mock_tag(backend.generate(req).text);
  EXPECT_EQ(tag->score.helpfulness, again->score.helpfulness);
}

TEST(MockBackend, AggregationInstructionBlendsAttendedResponses) {
  MockParams p;
  p.seed = 7;
  MockBackend backend(p);
  GenerationRequest req;
  req.question = "Q1";
  req.agent_index = 5;
  req.round_index = 4;
  req.system_prompt = aggregation_instruction();
  req.reference_responses = {
      {"A1", format_mock_tag({0.9, 0.3}, 0.0)},
      {"A2", format_mock_tag({0.5, 0.7}, 0.5)},
  };
  auto tag = parse_mock_tag(backend.generate(req).text);
  ASSERT_TRUE(tag.has_value());
  EXPECT_DOUBLE_EQ(tag->score.helpfulness, 0.7);
  EXPECT_DOUBLE_EQ(tag->score.harmlessness, 0.5);
}

TEST(MockBackend, DiversityFloorScalesTheUpdateRate) {
  // Same-level references (zero spread) move at rate * floor.
  MockParams p;
  p.seed = 7;
  p.rate = 0.5;
  p.diversity_floor = 0.5;
  MockBackend backend(p);
  GenerationRequest req = initial_request(0, "Q1", 0.5);
  req.round_index = 1;
  req.reference_responses = {
      {"A1", format_mock_tag({0.5, 0.5}, 0.5)},
      {"A2", format_mock_tag({0.9, 0.5}, 0.5)},
  };
  auto tag = parse_mock_tag(backend.generate(req).text);
  ASSERT_TRUE(tag.has_value());
  // rate_eff = 0.5 * 0.5 = 0.25: 0.5 + 0.25*(0.9-0.5) = 0.6
  EXPECT_DOUBLE_EQ(tag->score.helpfulness, 0.6);

  // Full-spread references restore the configured rate.
  req.reference_responses = {
      {"A1", format_mock_tag({0.5, 0.5}, 0.0)},
      {"A2", format_mock_tag({0.9, 0.5}, 1.0)},
  };
  tag = parse_mock_tag(backend.generate(req).text);
  EXPECT_DOUBLE_EQ(tag->score.helpfulness, 0.7);
}

TEST(MockBackend, QuestionTypeSplitSelectsTheMatchingModel) {
  MockParams p;
  p.seed = 7;
  p.benign_model = AffineScoreModel{0.95, 0.55, 0.75, 0.95};
  p.harmful_model = AffineScoreModel{0.75, 0.35, 0.15, 0.95};
  MockBackend backend(p);
  // Find one question of each hidden type.
  std::string benign_q, harmful_q;
  for (int i = 0; i < 32 && (benign_q.empty() || harmful_q.empty()); ++i) {
    std::string q = "probe-" + std::to_string(i);
    (MockBackend::question_is_harmful(q) ? harmful_q : benign_q) = q;
  }
  ASSERT_FALSE(benign_q.empty());
  ASSERT_FALSE(harmful_q.empty());
  auto benign = parse_mock_tag(
      backend.generate(initial_request(0, benign_q, 0.0)).text);
  EXPECT_DOUBLE_EQ(benign->score.helpfulness, 0.95);
  EXPECT_DOUBLE_EQ(benign->score.harmlessness, 0.75);
  auto harmful = parse_mock_tag(
      backend.generate(initial_request(0, harmful_q, 0.0)).text);
  EXPECT_DOUBLE_EQ(harmful->score.helpfulness, 0.75);
  EXPECT_DOUBLE_EQ(harmful->score.harmlessness, 0.15);
}

TEST(FormatUserMessage, ReferencesRideUnderAFixedHeader) {
  GenerationRequest req;
  req.question = "Q";
  EXPECT_EQ(format_user_message(req), "Q");
  req.reference_responses = {{"A1", "alpha"}, {"A3", "gamma"}};
  auto msg = format_user_message(req);
  EXPECT_NE(msg.find("Other agents' answers:"), std::string::npos);
  EXPECT_NE(msg.find("A1: alpha"), std::string::npos);
  EXPECT_NE(msg.find("A3: gamma"), std::string::npos);
}

}  // namespace
}  // namespace gvic
