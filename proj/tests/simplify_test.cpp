#include <gtest/gtest.h>

#include <random>

#include "maidkit/cli.hpp"
#include "maidkit/simplify.hpp"
#include "oracles.hpp"
#include "random_maid.hpp"

namespace maidkit {
namespace {

std::set<Edge> edge_set(const std::vector<Edge>& edges) { return {edges.begin(), edges.end()}; }

// Card game after A's conversion and the three prunings.
Maid simplified_card_game() {
  Maid m = convert_decision_to_chance(cli::card_game(1), "A");
  for (const auto& [from, to] : std::vector<std::pair<NodeId, NodeId>>{
           {"J", "C"}, {"A", "B"}, {"C", "B"}}) {
    m = remove_edge(m, from, to);
  }
  return m;
}

TEST(Identification, CardGameEliminatesA) {
  Maid m = cli::card_game(1);
  BlockCache cache;
  auto r = identification_phase(m, all_effective(m), cache);
  EXPECT_TRUE(r.changed);
  EXPECT_EQ(r.eliminated, std::vector<NodeId>{"A"});
  EXPECT_EQ(r.conversion_edges, (std::vector<Edge>{{"J", "A"}}));
  EXPECT_FALSE(r.effectiveness.at("A"));
  EXPECT_TRUE(r.effectiveness.at("B"));
  EXPECT_EQ(r.maid.kind(r.maid.index_of("A")), NodeKind::Chance);
}

TEST(Identification, SimplifiedCardGameIsStable) {
  Maid m = simplified_card_game();
  BlockCache cache;
  EffectivenessMap flags = all_effective(m);
  flags["A"] = false;
  auto r = identification_phase(m, flags, cache);
  EXPECT_FALSE(r.changed);
  EXPECT_TRUE(r.eliminated.empty());
}

// d1's only pattern is manipulating d2. d2 cannot affect its owner's
// utility, and converting it cuts d1 -> d2, so d1 falls in the same phase.
TEST(Identification, CascadeWithinOnePhase) {
  Maid m = MaidBuilder()
               .agent("p")
               .agent("q")
               .decision("d1", "p", {"0", "1"})
               .decision("d2", "q", {"0", "1"}, {"d1"})
               .utility("u_p", "p", {"d2"})
               .utility("u_q", "q", {"d1"})
               .build();
  EXPECT_FALSE(manipulation(m, "d1", all_effective(m)).empty());
  BlockCache cache;
  auto r = identification_phase(m, all_effective(m), cache);
  EXPECT_EQ(r.eliminated, (std::vector<NodeId>{"d2", "d1"}));
  EXPECT_FALSE(r.effectiveness.at("d1"));
  EXPECT_FALSE(r.effectiveness.at("d2"));
}

TEST(RetractEdges, CardGameAfterConversion) {
  Maid m = convert_decision_to_chance(cli::card_game(1), "A");
  auto r = retract_edges(m);
  EXPECT_TRUE(r.removed);
  EXPECT_EQ(edge_set(r.removed_edges),
            (std::set<Edge>{{"J", "C"}, {"A", "B"}, {"C", "B"}}));
  EXPECT_TRUE(r.maid.node("B").parents.empty());
  EXPECT_TRUE(r.maid.node("C").parents.empty());
}

TEST(RetractEdges, SimplifiedCardGameRemovesNothing) {
  auto r = retract_edges(simplified_card_game());
  EXPECT_FALSE(r.removed);
  EXPECT_TRUE(r.removed_edges.empty());
}

TEST(RetractEdges, KeepsRelevantObservation) {
  Maid m = MaidBuilder()
               .agent("a")
               .chance("x", {"0", "1"})
               .decision("d", "a", {"0", "1"}, {"x"})
               .utility("u_d", "a", {"x", "d"})
               .build();
  auto r = retract_edges(m);
  EXPECT_FALSE(r.removed);
  EXPECT_TRUE(r.maid.has_edge(r.maid.index_of("x"), r.maid.index_of("d")));
}

// y only matters through z, which is also observed: y's edge goes, z's stays.
TEST(RetractEdges, RequiresDecisionInConditioningSet) {
  Maid m = MaidBuilder()
               .agent("a")
               .chance("y", {"0", "1"})
               .chance("z", {"0", "1"}, {"y"})
               .decision("d", "a", {"0", "1"}, {"y", "z"})
               .utility("u", "a", {"z", "d"})
               .build();
  auto r = retract_edges(m);
  EXPECT_EQ(r.removed_edges, (std::vector<Edge>{{"y", "d"}}));
}

TEST(Simplify, CardGame) {
  auto r = simplify(cli::card_game(1));
  EXPECT_EQ(r.iterations_count, 2u);
  ASSERT_EQ(r.trace.iterations.size(), 2u);
  EXPECT_EQ(r.trace.eliminated(), std::vector<NodeId>{"A"});
  EXPECT_EQ(edge_set(r.trace.removed_edges()),
            (std::set<Edge>{{"J", "A"}, {"J", "C"}, {"A", "B"}, {"C", "B"}}));
  EXPECT_EQ(edge_set(r.final.edges()),
            (std::set<Edge>{{"J", "U_B"}, {"B", "U_A"}, {"B", "U_B"}, {"B", "U_C"}, {"C", "U_C"}}));
  EXPECT_EQ(r.final.node("A").kind, NodeKind::Chance);
  EXPECT_TRUE(r.final.node("A").parents.empty());
  EXPECT_FALSE(r.effectiveness.at("A"));
  EXPECT_TRUE(r.effectiveness.at("B"));
  EXPECT_TRUE(r.effectiveness.at("C"));
  EXPECT_TRUE(r.trace.iterations[1].eliminated.empty());
  EXPECT_TRUE(r.trace.iterations[1].pruned_edges.empty());
}

TEST(Simplify, CardGameThree) {
  auto r = simplify(cli::card_game(3));
  EXPECT_EQ(r.trace.eliminated(), std::vector<NodeId>{"A"});
  EXPECT_EQ(r.final.decisions().size(), 4u);
  for (NodeIndex d : r.final.decisions()) EXPECT_TRUE(r.final.parents(d).empty());
}

TEST(Simplify, RejectsInvalid) {
  Maid m = MaidBuilder().chance("A", {"p"}).build();
  EXPECT_THROW(simplify(m), MaidError);
}

TEST(SimplifyProperties, IdempotentAndSurvivorsHavePatterns) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 150; ++trial) {
    Maid m = testing::random_maid(rng, {});
    auto r = simplify(m);
    auto again = simplify(r.final);
    EXPECT_EQ(edge_set(again.final.edges()), edge_set(r.final.edges()));
    EXPECT_TRUE(again.trace.eliminated().empty());
    EXPECT_EQ(again.iterations_count, 1u);

    for (const auto& [id, flag] : r.effectiveness) {
      const NodeIndex v = r.final.index_of(id);
      EXPECT_EQ(flag, r.final.is_decision(v));
      DetectorOptions o;
      o.mode = WitnessMode::All;
      if (flag) {
        EXPECT_FALSE(detect_patterns(r.final, id, r.effectiveness, o, false).empty());
      } else {
        EXPECT_TRUE(r.final.parents(v).empty());
        const auto& cpt = *r.final.node(v).cpt;
        for (double p : cpt) EXPECT_DOUBLE_EQ(p, 1.0 / cpt.size());
      }
    }
  }
}

TEST(SimplifyProperties, TraceIsConsistentAndProgressIsMonotone) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 150; ++trial) {
    Maid m = testing::random_maid(rng, {});
    auto r = simplify(m);
    std::set<Edge> seen_edges;
    std::set<NodeId> seen_nodes;
    for (const Edge& e : r.trace.removed_edges()) {
      EXPECT_TRUE(seen_edges.insert(e).second);
      EXPECT_TRUE(m.has_edge(m.index_of(e.from), m.index_of(e.to)));
    }
    for (const NodeId& d : r.trace.eliminated()) EXPECT_TRUE(seen_nodes.insert(d).second);
    EXPECT_EQ(r.final.edge_count() + seen_edges.size(), m.edge_count());
    for (std::size_t i = 0; i + 1 < r.trace.iterations.size(); ++i) {
      const auto& it = r.trace.iterations[i];
      EXPECT_TRUE(!it.eliminated.empty() || !it.pruned_edges.empty());
    }
    const auto& last = r.trace.iterations.back();
    EXPECT_TRUE(last.eliminated.empty() && last.pruned_edges.empty());
  }
}

// Replays the trace and checks each pruned edge against the criterion on the
// graph state the pruning phase saw.
TEST(SimplifyProperties, PrunedEdgesAreSeparated) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 150; ++trial) {
    Maid m = testing::random_maid(rng, {});
    auto r = simplify(m);
    Maid state = m;
    for (const auto& it : r.trace.iterations) {
      for (const NodeId& d : it.eliminated) state = convert_decision_to_chance(state, d);
      // Every pruned edge is separated once all of them are removed, which is
      // the masked graph retract_edges converged on.
      Maid after = state;
      for (const Edge& e : it.pruned_edges) after = remove_edge(after, e.from, e.to);
      for (const Edge& e : it.pruned_edges) {
        std::set<NodeId> w{e.to};
        for (const NodeId& p : state.node(e.to).parents) {
          if (p != e.from) w.insert(p);
        }
        for (NodeIndex u : after.utilities_of(state.node(e.to).owner)) {
          EXPECT_TRUE(d_separated(after, e.from, after.node(u).id, w))
              << "trial " << trial << " edge " << e.from << "->" << e.to;
        }
      }
      state = after;
    }
  }
}

TEST(SimplifyProperties, CacheIsTransparent) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    Maid m = testing::random_maid(rng, {});
    SimplifyOptions off;
    off.memoize = false;
    auto a = simplify(m);
    auto b = simplify(m, off);
    EXPECT_EQ(edge_set(a.final.edges()), edge_set(b.final.edges()));
    EXPECT_EQ(a.effectiveness, b.effectiveness);
    EXPECT_EQ(a.iterations_count, b.iterations_count);
  }
}

}  // namespace
}  // namespace maidkit
