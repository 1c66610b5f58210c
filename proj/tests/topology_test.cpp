#include "gvic/topology.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <set>

namespace gvic {
namespace {

// --- independent oracles -----------------------------------------------------

// Mutual-reachability components via transitive closure; knows nothing about
// the BFS/SCC code under test.
std::vector<std::vector<int>> brute_force_components(
    const CommunicationPlan& plan) {
  const int n = plan.n_agents;
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (int k = 0; k < n; ++k) {
    reach[k][k] = 1;
    for (int j : plan.peers[k]) reach[k][j] = 1;
  }
  for (int via = 0; via < n; ++via)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (reach[i][via] && reach[via][j]) reach[i][j] = 1;
  std::vector<int> comp_of(n, -1);
  std::vector<std::vector<int>> comps;
  for (int i = 0; i < n; ++i) {
    if (comp_of[i] >= 0) continue;
    std::vector<int> comp;
    for (int j = 0; j < n; ++j)
      if (reach[i][j] && reach[j][i]) {
        comp_of[j] = static_cast<int>(comps.size());
        comp.push_back(j);
      }
    comps.push_back(comp);
  }
  std::sort(comps.begin(), comps.end());
  return comps;
}

// Residue classes of k mod gcd(g, N); valid while m*g <= N + g.
std::vector<std::vector<int>> residue_class_components(int n, int g) {
  int d = std::gcd(g, n);
  std::vector<std::vector<int>> comps(d);
  for (int k = 0; k < n; ++k) comps[k % d].push_back(k);
  std::sort(comps.begin(), comps.end());
  return comps;
}

// --- pinned examples ---------------------------------------------------------

TEST(BuildPlan, IntervalSixAgentsMatchesIntroductoryExample) {
  auto plan = build_plan(TopologyKind::Interval, 6, 3);
  EXPECT_EQ(plan.gap, 2);
  EXPECT_EQ(plan.peers[0], (std::vector<int>{2, 4}));  // A1 with A3 and A5
  EXPECT_EQ(plan.peers[1], (std::vector<int>{3, 5}));  // A2 with A4 and A6
  EXPECT_FALSE(plan.degraded);
}

TEST(BuildPlan, IntervalFiveAgents) {
  auto plan = build_plan(TopologyKind::Interval, 5, 3);
  EXPECT_EQ(plan.gap, 2);
  EXPECT_EQ(plan.peers[0], (std::vector<int>{2, 4}));
  EXPECT_EQ(plan.peers[3], (std::vector<int>{0, 2}));  // (3+2)%5, (3+4)%5
  EXPECT_EQ(plan.references[3], (std::vector<int>{3, 0, 2}));
  EXPECT_FALSE(plan.degraded);
}

TEST(BuildPlan, FullyConnectedThreeAgents) {
  auto plan = build_plan(TopologyKind::FullyConnected, 3, 999);
  EXPECT_EQ(plan.peers[0], (std::vector<int>{1, 2}));
  EXPECT_EQ(plan.peers[1], (std::vector<int>{0, 2}));
  EXPECT_EQ(plan.peers[2], (std::vector<int>{0, 1}));
}

TEST(BuildPlan, WraparoundCollisionDegradesPlan) {
  auto plan = build_plan(TopologyKind::Interval, 4, 3);
  EXPECT_EQ(plan.gap, 2);
  // raw refs of agent 0: [0, 2, (0+4)%4=0] -> dedup leaves one peer
  EXPECT_EQ(plan.peers[0], (std::vector<int>{2}));
  EXPECT_TRUE(plan.degraded);
  EXPECT_FALSE(plan.warnings.empty());
}

TEST(BuildPlan, NeighborIsIntervalWithGapOne) {
  auto nc = build_plan(TopologyKind::Neighbor, 7, 5);  // m argument ignored
  EXPECT_EQ(nc.gap, 1);
  EXPECT_EQ(nc.group_size, 3);
  EXPECT_EQ(nc.references[0], (std::vector<int>{0, 1, 2}));
}

TEST(BuildPlan, RejectsInvalidConfigs) {
  EXPECT_THROW(build_plan(TopologyKind::Interval, 1, 1), InvalidConfigError);
  EXPECT_THROW(build_plan(TopologyKind::Interval, 5, 6), InvalidConfigError);
  EXPECT_THROW(build_plan(TopologyKind::Interval, 5, 1), InvalidConfigError);
}

TEST(Analyze, FiveAgentIntervalIsOneComponent) {
  auto report = analyze(build_plan(TopologyKind::Interval, 5, 3));
  ASSERT_EQ(report.components.size(), 1u);
  EXPECT_EQ(report.components[0], (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(Analyze, SixAgentIntervalSplitsIntoParities) {
  auto report = analyze(build_plan(TopologyKind::Interval, 6, 3));
  ASSERT_EQ(report.components.size(), 2u);
  EXPECT_EQ(report.components[0], (std::vector<int>{0, 2, 4}));
  EXPECT_EQ(report.components[1], (std::vector<int>{1, 3, 5}));
  EXPECT_FALSE(report.rounds_to_full_propagation.has_value());
}

TEST(Analyze, FullyConnectedMessageCount) {
  auto report = analyze(build_plan(TopologyKind::FullyConnected, 4, 0));
  EXPECT_EQ(report.message_count, 12);
  EXPECT_EQ(report.rounds_to_full_propagation, std::optional<int>(1));
}

TEST(OverheadEquivalence, MatchesNeighborAtStandardSizes) {
  auto r5 = overhead_equivalence_check(5);
  EXPECT_TRUE(r5.equivalent);
  EXPECT_EQ(r5.interval_messages, 10);
  EXPECT_EQ(r5.neighbor_messages, 10);

  auto r64 = overhead_equivalence_check(64);
  EXPECT_TRUE(r64.equivalent);
  EXPECT_EQ(r64.interval_messages, 128);

  auto r4 = overhead_equivalence_check(4);
  EXPECT_FALSE(r4.equivalent);
  EXPECT_TRUE(r4.interval_degraded);
}

TEST(DiversityProfile, IntervalSpreadsNeighborDoesNot) {
  auto ic6 = diversity_profile(build_plan(TopologyKind::Interval, 6, 3));
  for (int d : ic6) EXPECT_EQ(d, 2);

  auto nc6 = diversity_profile(build_plan(TopologyKind::Neighbor, 6, 3));
  for (int d : nc6) EXPECT_EQ(d, 1);

  // Wraparound reduces spread below g on 5 agents: {3, 0, 2} has d(3,2)=1.
  auto ic5 = diversity_profile(build_plan(TopologyKind::Interval, 5, 3));
  EXPECT_EQ(*std::min_element(ic5.begin(), ic5.end()), 1);
}

// --- properties ----------------------------------------------------------------

TEST(PlanProperties, CoverageUnionAndPeerSanity) {
  for (int n = 2; n <= 64; ++n) {
    for (int m = 2; m <= n; ++m) {
      auto plan = build_plan(TopologyKind::Interval, n, m);
      std::set<int> covered;
      for (int k = 0; k < n; ++k) {
        EXPECT_EQ(plan.references[k][0], k);
        for (int j : plan.references[k]) {
          ASSERT_GE(j, 0);
          ASSERT_LT(j, n);
          covered.insert(j);
        }
        for (int j : plan.peers[k]) EXPECT_NE(j, k);
      }
      EXPECT_EQ(static_cast<int>(covered.size()), n)
          << "coverage union broken at n=" << n << " m=" << m;
      EXPECT_TRUE(verify_plan(plan).empty());
    }
  }
}

TEST(PlanProperties, IntervalThreeMatchesNeighborMessageCountWithoutDedup) {
  for (int n = 3; n <= 64; ++n) {
    auto ic = build_plan(TopologyKind::Interval, n, 3);
    if (ic.degraded) continue;
    auto nc = build_plan(TopologyKind::Neighbor, n, 3);
    EXPECT_EQ(analyze(ic).message_count, analyze(nc).message_count) << "n=" << n;
    EXPECT_EQ(analyze(ic).message_count, 2 * n);
  }
}

TEST(PlanProperties, BuildPlanIsPure) {
  for (auto kind : {TopologyKind::Interval, TopologyKind::Neighbor,
                    TopologyKind::FullyConnected}) {
    auto a = build_plan(kind, 12, 4);
    auto b = build_plan(kind, 12, 4);
    EXPECT_EQ(a.references, b.references);
    EXPECT_EQ(a.peers, b.peers);
    EXPECT_EQ(a.degraded, b.degraded);
  }
}

TEST(ComponentsOracle, AnalyzeMatchesBruteForceUpTo16) {
  for (int n = 2; n <= 16; ++n) {
    for (int m = 2; m <= n; ++m) {
      for (auto kind : {TopologyKind::Interval, TopologyKind::Neighbor,
                        TopologyKind::FullyConnected}) {
        auto plan = build_plan(kind, n, m);
        EXPECT_EQ(analyze(plan).components, brute_force_components(plan))
            << to_string(kind) << " n=" << n << " m=" << m;
      }
    }
  }
}

TEST(ComponentsOracle, ResidueClassesValidatedThenAppliedTo64) {
  // First validate the closed form against brute force where it claims to
  // hold, then lean on it for the sizes brute force would not cover.
  for (int n = 2; n <= 16; ++n) {
    for (int m = 2; m <= n; ++m) {
      auto plan = build_plan(TopologyKind::Interval, n, m);
      if (m * plan.gap > n + plan.gap) continue;
      EXPECT_EQ(brute_force_components(plan),
                residue_class_components(n, plan.gap))
          << "n=" << n << " m=" << m;
    }
  }
  for (int n = 17; n <= 64; ++n) {
    auto plan = build_plan(TopologyKind::Interval, n, 3);
    if (3 * plan.gap > n + plan.gap) continue;
    EXPECT_EQ(analyze(plan).components, residue_class_components(n, plan.gap))
        << "n=" << n;
  }
}

TEST(Dot, ExportListsEveryReferenceEdge) {
  auto plan = build_plan(TopologyKind::Interval, 5, 3);
  auto dot = to_dot(plan);
  EXPECT_NE(dot.find("digraph references"), std::string::npos);
  EXPECT_NE(dot.find("A1 -> A3;"), std::string::npos);
  EXPECT_NE(dot.find("A1 -> A5;"), std::string::npos);
  EXPECT_NE(dot.find("A4 -> A1;"), std::string::npos);
}

}  // namespace
}  // namespace gvic
