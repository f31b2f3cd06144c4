#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "maidkit/cli.hpp"
#include "maidkit/semantics.hpp"
#include "random_maid.hpp"

namespace maidkit {
namespace {

constexpr double kTol = 1e-9;

// Card game after simplification, with the parameters of the original.
Maid simplified_card_game() { return simplify(cli::card_game(1)).final; }

// C announces the card it sees; B repeats C's announcement whatever A does.
StrategyProfile truthful_profile(const Maid& m) {
  StrategyProfile p;
  p.rules.emplace("A", uniform_rule(m, "A"));
  p.rules.emplace("C", pure_rule(m, "C", {0, 1, 2}));
  std::vector<std::size_t> b(9);
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t c = 0; c < 3; ++c) b[a * 3 + c] = c;
  }
  p.rules.emplace("B", pure_rule(m, "B", b));
  return p;
}

Maid matching_pennies() {
  return MaidBuilder()
      .agent("p")
      .agent("q")
      .decision("dp", "p", {"h", "t"})
      .decision("dq", "q", {"h", "t"})
      .utility("u_p", "p", {"dp", "dq"}, std::vector<double>{1, 0, 0, 1})
      .utility("u_q", "q", {"dp", "dq"}, std::vector<double>{0, 1, 1, 0})
      .build();
}

Maid single_decision() {
  return MaidBuilder()
      .agent("a")
      .chance("s", {"x", "y"}, {}, std::vector<double>{0.3, 0.7})
      .decision("D", "a", {"l", "m", "r"}, {"s"})
      .utility("U", "a", {"s", "D"}, std::vector<double>{1, 5, 2, 4, 0, 3})
      .build();
}

std::vector<Assignment> all_assignments(const Maid& m) {
  std::vector<Assignment> out{{}};
  for (const Node& n : m.nodes()) {
    if (n.kind == NodeKind::Utility) continue;
    std::vector<Assignment> next;
    for (const auto& a : out) {
      for (const auto& v : n.domain) {
        auto b = a;
        b[n.id] = v;
        next.push_back(std::move(b));
      }
    }
    out = std::move(next);
  }
  return out;
}

TEST(JointProbability, SingleChanceNode) {
  Maid m = MaidBuilder().chance("c", {"0", "1"}, {}, std::vector<double>{0.5, 0.5}).build();
  EXPECT_DOUBLE_EQ(joint_probability(m, {}, {{"c", "0"}}), 0.5);
  EXPECT_DOUBLE_EQ(joint_probability(m, {}, {{"c", "1"}}), 0.5);
}

TEST(JointProbability, CardGameUniform) {
  Maid m = cli::card_game(1);
  auto p = uniform_profile(m);
  EXPECT_NEAR(joint_probability(m, p, {{"J", "H"}, {"A", "H"}, {"C", "H"}, {"B", "H"}}),
              1.0 / 81.0, 1e-15);
  double total = 0.0;
  for (const auto& a : all_assignments(m)) total += joint_probability(m, p, a);
  EXPECT_NEAR(total, 1.0, kTol);
}

TEST(JointProbability, Errors) {
  Maid m = cli::card_game(1);
  auto p = uniform_profile(m);
  EXPECT_THROW(joint_probability(m, p, {{"J", "H"}}), MaidError);
  EXPECT_THROW(joint_probability(m, p, {{"J", "Z"}, {"A", "H"}, {"C", "H"}, {"B", "H"}}),
               MaidError);
  EXPECT_THROW(joint_probability(cli::principal_agent(), {}, {}), MaidError);
  p.rules.erase("B");
  EXPECT_THROW(joint_probability(m, p, {{"J", "H"}, {"A", "H"}, {"C", "H"}, {"B", "H"}}),
               MaidError);
}

TEST(ExpectedUtility, CardGameUniform) {
  Maid m = cli::card_game(1);
  auto p = uniform_profile(m);
  EXPECT_NEAR(expected_utility(m, p, "b"), 10.0 / 3.0, kTol);
  EXPECT_NEAR(expected_utility(m, p, "a"), 17.0 / 3.0, kTol);
  EXPECT_NEAR(expected_utility(m, p, "c"), 10.0 / 3.0, kTol);
  EXPECT_THROW(expected_utility(m, p, "nobody"), MaidError);
}

TEST(ExpectedUtility, ScalesLinearly) {
  Maid m = cli::card_game(1);
  std::vector<Node> nodes(m.nodes().begin(), m.nodes().end());
  for (Node& n : nodes) {
    if (n.id == "U_A") {
      for (double& v : *n.table) v *= 2.5;
    }
  }
  Maid scaled(m.agents(), nodes);
  auto p = uniform_profile(m);
  EXPECT_NEAR(expected_utility(scaled, p, "a"), 2.5 * expected_utility(m, p, "a"), kTol);
}

TEST(BestResponseGap, CardGameTruthful) {
  Maid m = cli::card_game(1);
  auto p = truthful_profile(m);
  EXPECT_NEAR(best_response_gap(m, p, "b"), 0.0, kTol);
  p.rules["B"] = uniform_rule(m, "B");
  EXPECT_NEAR(best_response_gap(m, p, "b"), 20.0 / 3.0, kTol);
}

TEST(BestResponseGap, CardGameUniformA) {
  Maid m = cli::card_game(1);
  EXPECT_NEAR(best_response_gap(m, uniform_profile(m), "a"), 0.0, kTol);
}

TEST(BestResponseGap, ArgmaxRuleHasNoGap) {
  Maid m = single_decision();
  StrategyProfile p;
  p.rules.emplace("D", pure_rule(m, "D", {1, 0}));
  EXPECT_NEAR(best_response_gap(m, p, "a"), 0.0, kTol);
  p.rules["D"] = pure_rule(m, "D", {0, 0});
  EXPECT_NEAR(best_response_gap(m, p, "a"), 0.3 * 4.0, kTol);
}

// Reference: every joint pure deviation of the agent, scored by expected_utility.
double brute_force_gap(const Maid& m, const StrategyProfile& p, const AgentId& agent) {
  std::vector<NodeIndex> own;
  for (NodeIndex d : m.decisions()) {
    if (m.node(d).owner == agent) own.push_back(d);
  }
  std::vector<std::vector<std::size_t>> actions;
  for (NodeIndex d : own) actions.emplace_back(configuration_count(m, d), 0);
  double best = expected_utility(m, p, agent);
  const double base = best;
  while (true) {
    StrategyProfile q = p;
    for (std::size_t i = 0; i < own.size(); ++i) {
      q.rules[m.node(own[i]).id] = pure_rule(m, m.node(own[i]).id, actions[i]);
    }
    best = std::max(best, expected_utility(m, q, agent));
    std::size_t i = own.size();
    bool done = true;
    while (i-- > 0) {
      bool carried = false;
      for (std::size_t k = actions[i].size(); k-- > 0;) {
        if (++actions[i][k] < m.node(own[i]).domain.size()) {
          carried = true;
          break;
        }
        actions[i][k] = 0;
      }
      if (carried) {
        done = false;
        break;
      }
    }
    if (done) break;
  }
  return best - base;
}

StrategyProfile random_profile(std::mt19937_64& rng, const Maid& m) {
  StrategyProfile p;
  std::uniform_real_distribution<double> w(0.0, 1.0);
  for (NodeIndex d : m.decisions()) {
    DecisionRule r = uniform_rule(m, m.node(d).id);
    const std::size_t dom = m.node(d).domain.size();
    for (std::size_t q = 0; q < r.table.size() / dom; ++q) {
      double sum = 0.0;
      for (std::size_t a = 0; a < dom; ++a) sum += (r.table[q * dom + a] = w(rng));
      for (std::size_t a = 0; a < dom; ++a) r.table[q * dom + a] /= sum;
    }
    p.rules[r.decision] = std::move(r);
  }
  return p;
}

TEST(BestResponseGap, MatchesJointPureDeviationSearch) {
  std::mt19937_64 rng(51);
  testing::RandomMaidOptions options;
  options.parameterized = true;
  options.max_nodes = 7;
  options.max_agents = 2;
  options.max_pure_profiles = 4096;
  for (int trial = 0; trial < 60; ++trial) {
    Maid m = testing::random_maid(rng, options);
    auto p = random_profile(rng, m);
    for (const AgentId& agent : m.agents()) {
      EXPECT_NEAR(best_response_gap(m, p, agent), brute_force_gap(m, p, agent), 1e-9)
          << "trial " << trial;
    }
  }
}

TEST(FindEquilibrium, SimplifiedCardGame) {
  Maid m = simplified_card_game();
  auto eq = find_equilibrium_small(m, 0);
  ASSERT_TRUE(eq.has_value());
  for (const AgentId& agent : m.agents()) EXPECT_LE(best_response_gap(m, *eq, agent), kTol);
  StrategyProfile hh;
  hh.rules.emplace("B", pure_rule(m, "B", {0}));
  hh.rules.emplace("C", pure_rule(m, "C", {0}));
  EXPECT_NEAR(best_response_gap(m, hh, "b"), 0.0, kTol);
  EXPECT_NEAR(best_response_gap(m, hh, "c"), 0.0, kTol);
  EXPECT_NEAR(expected_utility(m, hh, "c"), 10.0, kTol);
}

TEST(FindEquilibrium, SingleDecisionArgmax) {
  Maid m = single_decision();
  auto eq = find_equilibrium_small(m, 3);
  ASSERT_TRUE(eq.has_value());
  EXPECT_EQ(eq->rules.at("D"), pure_rule(m, "D", {1, 0}));
}

TEST(FindEquilibrium, MatchingPenniesHasNone) {
  EXPECT_FALSE(find_equilibrium_small(matching_pennies(), 0).has_value());
}

TEST(FindEquilibrium, ScaleGuard) {
  // 2^(3^13) pure rules for D.
  MaidBuilder b;
  b.agent("a");
  std::vector<NodeId> parents;
  for (int i = 0; i < 13; ++i) {
    const std::string id = "s" + std::to_string(i);
    b.chance(id, {"0", "1", "2"}, {}, std::vector<double>(3, 1.0 / 3.0));
    parents.push_back(id);
  }
  b.decision("D", "a", {"0", "1"}, parents);
  parents.push_back("D");
  b.utility("U", "a", {"D"}, std::vector<double>{0, 1});
  EXPECT_THROW(find_equilibrium_small(b.build(), 0), ScaleGuardError);
}

// Opponents play rules of the simplified game, so B ignores A.
TEST(IsMotivated, CardGameAIsNot) {
  Maid m = cli::card_game(1);
  Maid reduced = simplified_card_game();
  std::mt19937_64 rng(52);
  for (int k = 0; k < 20; ++k) {
    auto others = lift_profile(m, reduced, random_profile(rng, reduced));
    others.rules.erase("A");
    EXPECT_FALSE(is_motivated_bruteforce(m, "A", others));
  }
}

TEST(IsMotivated, CardGameAWhenBWatchesA) {
  Maid m = cli::card_game(1);
  StrategyProfile others = truthful_profile(m);
  others.rules.erase("A");
  std::vector<std::size_t> b(9);
  for (std::size_t q = 0; q < 9; ++q) b[q] = q / 3;  // B copies A
  others.rules["B"] = pure_rule(m, "B", b);
  EXPECT_TRUE(is_motivated_bruteforce(m, "A", others));
}

TEST(IsMotivated, CardGameBFollowsTruthfulC) {
  Maid m = cli::card_game(1);
  auto others = truthful_profile(m);
  others.rules.erase("B");
  EXPECT_TRUE(is_motivated_bruteforce(m, "B", others));
}

TEST(IsMotivated, ConstantUtilityIsNot) {
  Maid m = MaidBuilder()
               .agent("a")
               .decision("D", "a", {"0", "1"})
               .utility("U", "a", {"D"}, std::vector<double>{4, 4})
               .build();
  EXPECT_FALSE(is_motivated_bruteforce(m, "D", {}));
}

TEST(Verify, CardGamePasses) {
  Maid m = cli::card_game(1);
  auto report = verify_simplification(m, simplify(m), 0);
  EXPECT_EQ(report.status, VerifyStatus::Pass);
  ASSERT_EQ(report.gaps.size(), 3u);
  for (const auto& [_, gap] : report.gaps) EXPECT_LE(gap, kTol);
}

TEST(Verify, TamperedEliminationOfCFails) {
  Maid m = cli::card_game(1);
  SimplificationResult tampered = simplify(m);
  tampered.final = convert_decision_to_chance(tampered.final, "C");
  tampered.effectiveness["C"] = false;
  auto report = verify_simplification(m, tampered, 0);
  EXPECT_EQ(report.status, VerifyStatus::Fail);
  EXPECT_NEAR(report.gaps.at("c"), 20.0 / 3.0, kTol);
}

// Without pruning C still sees J. Any equilibrium of the tampered game in
// which C reveals the card leaves B a profitable deviation in the original.
TEST(Verify, TamperedEliminationOfBFailsWhenCReveals) {
  Maid m = cli::card_game(1);
  SimplificationResult tampered;
  tampered.final =
      convert_decision_to_chance(convert_decision_to_chance(m, "A"), "B");
  tampered.effectiveness = {{"A", false}, {"B", false}, {"C", true}};
  StrategyProfile reveal;
  reveal.rules.emplace("C", pure_rule(tampered.final, "C", {0, 1, 2}));
  ASSERT_LE(best_response_gap(tampered.final, reveal, "c"), kTol);
  auto lifted = lift_profile(m, tampered.final, reveal);
  EXPECT_NEAR(best_response_gap(m, lifted, "b"), 20.0 / 3.0, kTol);

  bool some_seed_fails = false;
  for (std::uint64_t seed = 0; seed < 64 && !some_seed_fails; ++seed) {
    some_seed_fails = verify_simplification(m, tampered, seed).status == VerifyStatus::Fail;
  }
  EXPECT_TRUE(some_seed_fails);
}

TEST(Verify, IdentitySimplificationPasses) {
  Maid m = single_decision();
  auto r = simplify(m);
  EXPECT_TRUE(r.trace.eliminated().empty());
  EXPECT_EQ(verify_simplification(m, r, 0).status, VerifyStatus::Pass);
}

TEST(Verify, NoPureEquilibriumIsInconclusive) {
  Maid m = matching_pennies();
  auto report = verify_simplification(m, simplify(m), 0);
  EXPECT_EQ(report.status, VerifyStatus::Inconclusive);
  EXPECT_TRUE(report.gaps.empty());
}

TEST(Verify, StructureOnlyIsRejected) {
  Maid m = cli::principal_agent();
  EXPECT_THROW(verify_simplification(m, simplify(m), 0), MaidError);
}

TEST(LiftProfile, IgnoresPrunedParents) {
  Maid m = cli::card_game(1);
  auto r = simplify(m);
  StrategyProfile p;
  p.rules.emplace("B", pure_rule(r.final, "B", {2}));
  p.rules.emplace("C", pure_rule(r.final, "C", {1}));
  auto lifted = lift_profile(m, r.final, p);
  EXPECT_EQ(lifted.rules.at("A"), uniform_rule(m, "A"));
  EXPECT_EQ(lifted.rules.at("B"), pure_rule(m, "B", std::vector<std::size_t>(9, 2)));
  EXPECT_EQ(lifted.rules.at("C"), pure_rule(m, "C", std::vector<std::size_t>(3, 1)));
}

TEST(LeafMetric, CardGame) {
  auto before = leaf_metric(cli::card_game(1));
  EXPECT_EQ(before.monolithic, 27);
  auto after = leaf_metric(simplified_card_game());
  ASSERT_EQ(after.per_decision.size(), 2u);
  EXPECT_EQ(after.per_decision[0].first, "B");
  EXPECT_EQ(after.per_decision[0].second, 9);
  EXPECT_EQ(after.per_decision[1].second, 9);
  EXPECT_EQ(after.decoupled_total, 18);
}

TEST(LeafMetric, ClosedFormsForCardGame) {
  for (int n = 1; n <= 10; ++n) {
    Maid m = cli::card_game(n);
    BigCount expected = 1;
    for (int i = 0; i < n + 2; ++i) expected *= 3;
    EXPECT_EQ(leaf_metric(m).monolithic, expected);
    EXPECT_EQ(leaf_metric(simplify(m).final).decoupled_total, 9 * (n + 1));
  }
}

TEST(LeafMetric, SingleDecision) {
  Maid m = MaidBuilder()
               .agent("a")
               .decision("D", "a", {"0", "1", "2", "3"})
               .utility("U", "a", {"D"})
               .build();
  auto metric = leaf_metric(m);
  EXPECT_EQ(metric.monolithic, 4);
  EXPECT_EQ(metric.decoupled_total, 4);
}

TEST(SemanticsProperties, Normalization) {
  std::mt19937_64 rng(53);
  testing::RandomMaidOptions options;
  options.parameterized = true;
  options.max_nodes = 6;
  for (int trial = 0; trial < 50; ++trial) {
    Maid m = testing::random_maid(rng, options);
    auto p = random_profile(rng, m);
    double total = 0.0;
    for (const auto& a : all_assignments(m)) total += joint_probability(m, p, a);
    EXPECT_NEAR(total, 1.0, kTol);
  }
}

// Instances where at least two agents still decide after simplification.
TEST(SemanticsProperties, VerifyOnStrategicGames) {
  std::mt19937_64 rng(55);
  testing::RandomMaidOptions options;
  options.parameterized = true;
  options.max_nodes = 8;
  options.min_nodes = 5;
  options.edge_probability = 0.4;
  options.max_pure_profiles = 20000;
  int strategic = 0;
  int found = 0;
  for (int attempt = 0; attempt < 5000 && strategic < 60; ++attempt) {
    Maid m = testing::random_maid(rng, options);
    auto r = simplify(m);
    std::set<AgentId> owners;
    for (NodeIndex d : r.final.decisions()) owners.insert(r.final.node(d).owner);
    if (owners.size() < 2) continue;
    ++strategic;
    auto report = verify_simplification(m, r, 0);
    EXPECT_NE(report.status, VerifyStatus::Fail) << cli::render(m);
    if (report.status == VerifyStatus::Pass) ++found;
  }
  EXPECT_EQ(strategic, 60);
  EXPECT_GT(found, 30);
}

TEST(SemanticsProperties, GapScalesWithUtilities) {
  std::mt19937_64 rng(54);
  testing::RandomMaidOptions options;
  options.parameterized = true;
  options.max_nodes = 7;
  options.max_pure_profiles = 4096;
  for (int trial = 0; trial < 40; ++trial) {
    Maid m = testing::random_maid(rng, options);
    const AgentId agent = *m.agents().begin();
    const double alpha = 0.5 + (rng() % 100) / 10.0;
    std::vector<Node> nodes(m.nodes().begin(), m.nodes().end());
    for (Node& n : nodes) {
      if (n.kind == NodeKind::Utility && n.owner == agent) {
        for (double& v : *n.table) v *= alpha;
      }
    }
    Maid scaled(m.agents(), nodes);
    auto p = random_profile(rng, m);
    EXPECT_NEAR(best_response_gap(scaled, p, agent), alpha * best_response_gap(m, p, agent),
                1e-8);
  }
}

}  // namespace
}  // namespace maidkit
