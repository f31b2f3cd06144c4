#include "maidkit/cli.hpp"

namespace maidkit::cli {

namespace {

const std::vector<std::string> kCards = {"H", "M", "L"};

// 10 when the two parents agree, 0 otherwise.
std::vector<double> match_table() {
  std::vector<double> table;
  for (std::size_t i = 0; i < kCards.size(); ++i) {
    for (std::size_t j = 0; j < kCards.size(); ++j) table.push_back(i == j ? 10.0 : 0.0);
  }
  return table;
}

}  // namespace

Maid card_game(int n) {
  if (n < 1) throw MaidError("card-game needs n >= 1");
  MaidBuilder b;
  b.agent("a").agent("b");
  b.chance("J", kCards, {}, std::vector<double>(3, 1.0 / 3.0));
  b.decision("A", "a", kCards, {"J"});
  b.utility("U_A", "a", {"B"}, std::vector<double>{10.0, 5.0, 2.0});
  b.utility("U_B", "b", {"B", "J"}, match_table());
  std::vector<NodeId> b_parents{"A"};
  for (int i = 1; i <= n; ++i) {
    const std::string suffix = n == 1 ? "" : "_" + std::to_string(i);
    const std::string c = "C" + suffix;
    const std::string agent = "c" + suffix;
    b.agent(agent);
    b.decision(c, agent, kCards, {"J"});
    b.utility("U_" + c, agent, {c, "B"}, match_table());
    b_parents.push_back(c);
  }
  b.decision("B", "b", kCards, b_parents);
  return b.build();
}

Maid principal_agent() {
  MaidBuilder b;
  b.agent("principal").agent("agent");
  b.chance("type", {"good", "bad"});
  b.chance("r0", {"high", "med", "low"});
  b.chance("r1", {"high", "med", "low"}, {"r0", "D1"});
  b.decision("P1", "principal", {"high", "low"}, {"r0"});
  b.decision("D1", "agent", {"work", "shirk"}, {"type", "P1"});
  b.decision("P2", "principal", {"high", "low"}, {"r1", "P1"});
  b.decision("D2", "agent", {"work", "shirk"}, {"type", "P2", "D1"});
  b.utility("U_P1", "principal", {"P1", "D1"});
  b.utility("U_P2", "principal", {"P2", "D2"});
  b.utility("U_D1", "agent", {"P1", "D1", "type"});
  b.utility("U_D2", "agent", {"P2", "D2", "type"});
  return b.build();
}

Maid fixture(std::string_view name, int n) {
  if (name == "card-game") return card_game(n);
  if (name == "principal-agent") return principal_agent();
  throw MaidError("unknown fixture '" + std::string(name) +
                  "' (expected card-game or principal-agent)");
}

std::string to_dot(const Maid& maid) {
  std::string out = "digraph maid {\n";
  for (const Node& node : maid.nodes()) {
    const char* shape = node.kind == NodeKind::Decision  ? "box"
                        : node.kind == NodeKind::Utility ? "diamond"
                                                         : "ellipse";
    std::string label = node.id;
    if (!node.owner.empty()) label += "\\n(" + node.owner + ")";
    out += "  \"" + node.id + "\" [shape=" + shape + ", label=\"" + label + "\"];\n";
  }
  for (const Edge& e : maid.edges()) {
    out += "  \"" + e.from + "\" -> \"" + e.to + "\";\n";
  }
  out += "}\n";
  return out;
}

}  // namespace maidkit::cli
