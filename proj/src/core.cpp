#include "maidkit/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <queue>
#include <sstream>

namespace maidkit {

namespace {

std::uint64_t next_revision() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

std::size_t domain_size_of(const Maid& maid, NodeIndex index) {
  return maid.node(index).domain.size();
}

// Parents of `node` resolved to indices, or nullopt if any is unresolved or
// has no domain (utility parents).
std::optional<std::vector<std::size_t>> parent_radices(const Maid& maid,
                                                        const Node& node) {
  std::vector<std::size_t> radices;
  radices.reserve(node.parents.size());
  for (const auto& p : node.parents) {
    auto idx = maid.find(p);
    if (!idx || maid.node(*idx).domain.empty()) return std::nullopt;
    radices.push_back(maid.node(*idx).domain.size());
  }
  return radices;
}

std::size_t product(const std::vector<std::size_t>& values) {
  std::size_t total = 1;
  for (auto v : values) total *= v;
  return total;
}

std::string format_number(double value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

}  // namespace

UnknownNodeError::UnknownNodeError(std::string_view id)
    : MaidError("unknown node '" + std::string(id) + "'") {}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Chance:
      return "chance";
    case NodeKind::Decision:
      return "decision";
    case NodeKind::Utility:
      return "utility";
  }
  return "unknown";
}

Maid::Maid() : revision_(next_revision()) {}

Maid::Maid(std::set<AgentId> agents, std::vector<Node> nodes)
    : agents_(std::move(agents)),
      nodes_(std::move(nodes)),
      revision_(next_revision()) {
  std::sort(nodes_.begin(), nodes_.end(),
            [](const Node& a, const Node& b) { return a.id < b.id; });
  lookup_.reserve(nodes_.size());
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id.empty()) throw MaidError("node id must not be empty");
    if (!lookup_.emplace(nodes_[i].id, i).second) {
      throw MaidError("duplicate node id '" + nodes_[i].id + "'");
    }
  }
  parent_index_.resize(nodes_.size());
  child_index_.resize(nodes_.size());
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    for (const auto& p : nodes_[i].parents) {
      auto it = lookup_.find(p);
      if (it == lookup_.end()) continue;
      auto& resolved = parent_index_[i];
      if (std::find(resolved.begin(), resolved.end(), it->second) !=
          resolved.end()) {
        continue;
      }
      resolved.push_back(it->second);
      child_index_[it->second].push_back(i);
    }
  }
  for (auto& children : child_index_) std::sort(children.begin(), children.end());
}

std::optional<NodeIndex> Maid::find(std::string_view id) const {
  auto it = lookup_.find(std::string(id));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

NodeIndex Maid::index_of(std::string_view id) const {
  auto idx = find(id);
  if (!idx) throw UnknownNodeError(id);
  return *idx;
}

bool Maid::has_edge(NodeIndex from, NodeIndex to) const {
  const auto& ps = parent_index_[to];
  return std::find(ps.begin(), ps.end(), from) != ps.end();
}

std::optional<std::vector<NodeIndex>> Maid::topological_order() const {
  std::vector<std::size_t> indegree(nodes_.size());
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    indegree[i] = parent_index_[i].size();
  }
  std::priority_queue<NodeIndex, std::vector<NodeIndex>, std::greater<>> ready;
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<NodeIndex> order;
  order.reserve(nodes_.size());
  while (!ready.empty()) {
    NodeIndex v = ready.top();
    ready.pop();
    order.push_back(v);
    for (NodeIndex c : child_index_[v]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (order.size() != nodes_.size()) return std::nullopt;
  return order;
}

std::vector<NodeIndex> Maid::decisions() const {
  std::vector<NodeIndex> out;
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == NodeKind::Decision) out.push_back(i);
  }
  return out;
}

std::vector<NodeIndex> Maid::utilities_of(std::string_view agent) const {
  std::vector<NodeIndex> out;
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == NodeKind::Utility && nodes_[i].owner == agent) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<Edge> Maid::edges() const {
  std::vector<Edge> out;
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    for (NodeIndex p : parent_index_[i]) {
      out.push_back({nodes_[p].id, nodes_[i].id});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t Maid::edge_count() const {
  std::size_t total = 0;
  for (const auto& ps : parent_index_) total += ps.size();
  return total;
}

bool Maid::fully_parameterized() const {
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::Chance && !n.cpt) return false;
    if (n.kind == NodeKind::Utility && !n.table) return false;
  }
  return true;
}

MaidBuilder& MaidBuilder::agent(AgentId name) {
  agents_.insert(std::move(name));
  return *this;
}

MaidBuilder& MaidBuilder::chance(NodeId id, std::vector<std::string> domain,
                                 std::vector<NodeId> parents,
                                 std::optional<std::vector<double>> cpt) {
  Node n;
  n.id = std::move(id);
  n.kind = NodeKind::Chance;
  n.domain = std::move(domain);
  n.parents = std::move(parents);
  n.cpt = std::move(cpt);
  nodes_.push_back(std::move(n));
  return *this;
}

MaidBuilder& MaidBuilder::decision(NodeId id, AgentId owner,
                                   std::vector<std::string> domain,
                                   std::vector<NodeId> parents) {
  Node n;
  n.id = std::move(id);
  n.kind = NodeKind::Decision;
  n.owner = std::move(owner);
  n.domain = std::move(domain);
  n.parents = std::move(parents);
  nodes_.push_back(std::move(n));
  return *this;
}

MaidBuilder& MaidBuilder::utility(NodeId id, AgentId owner,
                                  std::vector<NodeId> parents,
                                  std::optional<std::vector<double>> table) {
  Node n;
  n.id = std::move(id);
  n.kind = NodeKind::Utility;
  n.owner = std::move(owner);
  n.parents = std::move(parents);
  n.table = std::move(table);
  nodes_.push_back(std::move(n));
  return *this;
}

MaidBuilder& MaidBuilder::node(Node node) {
  nodes_.push_back(std::move(node));
  return *this;
}

Maid MaidBuilder::build() const { return Maid(agents_, nodes_); }

std::vector<Diagnostic> validate(const Maid& maid) {
  std::vector<Diagnostic> out;
  auto report = [&out](const NodeId& node, std::string rule,
                       std::string message) {
    out.push_back({node, std::move(rule), std::move(message)});
  };

  for (const auto& agent : maid.agents()) {
    if (agent.empty()) report("", "empty-agent", "agent name is empty");
  }

  for (const Node& n : maid.nodes()) {
    const bool owned = n.kind != NodeKind::Chance;
    if (owned && n.owner.empty()) {
      report(n.id, "missing-owner",
             std::string(to_string(n.kind)) + " node has no owning agent");
    } else if (owned && !maid.agents().contains(n.owner)) {
      report(n.id, "unknown-agent", "owner '" + n.owner + "' is not declared");
    } else if (!owned && !n.owner.empty()) {
      report(n.id, "unexpected-owner", "chance node must not have an owner");
    }

    if (n.kind == NodeKind::Utility) {
      if (!n.domain.empty()) {
        report(n.id, "utility-has-domain", "utility node must not declare a domain");
      }
      if (n.cpt) report(n.id, "utility-has-cpt", "utility node carries a cpt");
    } else {
      if (n.domain.size() < 2) {
        report(n.id, "domain-too-small", "domain needs at least two values");
      }
      std::set<std::string> seen(n.domain.begin(), n.domain.end());
      if (seen.size() != n.domain.size()) {
        report(n.id, "duplicate-value", "domain repeats a value");
      }
    }
    if (n.kind == NodeKind::Decision && (n.cpt || n.table)) {
      report(n.id, "decision-has-params", "decision node carries parameters");
    }
    if (n.kind == NodeKind::Chance && n.table) {
      report(n.id, "chance-has-table", "chance node carries a utility table");
    }

    std::set<NodeId> seen_parents;
    for (const auto& p : n.parents) {
      if (!seen_parents.insert(p).second) {
        report(n.id, "duplicate-parent", "parent '" + p + "' listed twice");
      }
      auto idx = maid.find(p);
      if (!idx) {
        report(n.id, "unknown-parent", "parent '" + p + "' does not exist");
      } else if (maid.node(*idx).kind == NodeKind::Utility) {
        report(p, "utility-not-sink",
               "utility is not a sink (it is a parent of '" + n.id + "')");
      }
    }

    auto radices = parent_radices(maid, n);
    if (!radices) continue;
    const std::size_t configs = product(*radices);
    if (n.cpt && n.kind == NodeKind::Chance && n.domain.size() >= 2) {
      const auto& cpt = *n.cpt;
      const std::size_t width = n.domain.size();
      if (cpt.size() != configs * width) {
        report(n.id, "cpt-arity",
               "cpt of '" + n.id + "' has " + std::to_string(cpt.size()) +
                   " entries, expected " + std::to_string(configs * width));
      } else {
        for (std::size_t row = 0; row < configs; ++row) {
          double sum = 0.0;
          bool bad_entry = false;
          for (std::size_t k = 0; k < width; ++k) {
            double v = cpt[row * width + k];
            if (!std::isfinite(v) || v < 0.0) bad_entry = true;
            sum += v;
          }
          if (bad_entry) {
            report(n.id, "cpt-negative",
                   "row " + std::to_string(row) + " has a negative or non-finite entry");
          } else if (std::abs(sum - 1.0) > 1e-9) {
            report(n.id, "row-not-normalized",
                   "row " + std::to_string(row) + " does not normalize (sum " +
                       format_number(sum) + ")");
          }
        }
      }
    }
    if (n.table && n.kind == NodeKind::Utility) {
      if (n.table->size() != configs) {
        report(n.id, "table-arity",
               "table of '" + n.id + "' has " + std::to_string(n.table->size()) +
                   " entries, expected " + std::to_string(configs));
      } else if (std::any_of(n.table->begin(), n.table->end(),
                             [](double v) { return !std::isfinite(v); })) {
        report(n.id, "table-non-finite", "table has a non-finite value");
      }
    }
  }

  if (!maid.topological_order()) {
    // Name one node that lies on a cycle.
    const std::size_t n = maid.size();
    std::vector<int> state(n, 0);
    std::vector<NodeIndex> stack;
    std::optional<std::vector<NodeIndex>> cycle;
    std::function<void(NodeIndex)> dfs = [&](NodeIndex v) {
      state[v] = 1;
      stack.push_back(v);
      for (NodeIndex c : maid.children(v)) {
        if (cycle) return;
        if (state[c] == 1) {
          auto it = std::find(stack.begin(), stack.end(), c);
          cycle.emplace(it, stack.end());
          return;
        }
        if (state[c] == 0) dfs(c);
      }
      stack.pop_back();
      state[v] = 2;
    };
    for (NodeIndex v = 0; v < n && !cycle; ++v) {
      if (state[v] == 0) dfs(v);
    }
    std::string text;
    if (cycle) {
      for (NodeIndex v : *cycle) text += maid.node(v).id + " -> ";
      text += maid.node(cycle->front()).id;
    }
    report(cycle ? maid.node(cycle->front()).id : NodeId{}, "cycle",
           "graph has a directed cycle: " + text);
  }
  return out;
}

std::vector<char> descendant_mask(const Maid& maid, NodeIndex x) {
  std::vector<char> seen(maid.size(), 0);
  std::vector<NodeIndex> stack{x};
  seen[x] = 1;
  while (!stack.empty()) {
    NodeIndex v = stack.back();
    stack.pop_back();
    for (NodeIndex c : maid.children(v)) {
      if (!seen[c]) {
        seen[c] = 1;
        stack.push_back(c);
      }
    }
  }
  return seen;
}

std::set<NodeId> descendants(const Maid& maid, std::string_view x) {
  auto mask = descendant_mask(maid, maid.index_of(x));
  std::set<NodeId> out;
  for (NodeIndex i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.insert(maid.node(i).id);
  }
  return out;
}

std::set<NodeId> ancestors(const Maid& maid, std::string_view x) {
  const NodeIndex start = maid.index_of(x);
  std::vector<char> seen(maid.size(), 0);
  std::vector<NodeIndex> stack{start};
  std::set<NodeId> out;
  while (!stack.empty()) {
    NodeIndex v = stack.back();
    stack.pop_back();
    for (NodeIndex p : maid.parents(v)) {
      if (!seen[p]) {
        seen[p] = 1;
        out.insert(maid.node(p).id);
        stack.push_back(p);
      }
    }
  }
  out.erase(std::string(x));
  return out;
}

std::size_t configuration_count(const Maid& maid, NodeIndex index) {
  std::size_t total = 1;
  for (NodeIndex p : maid.parents(index)) total *= domain_size_of(maid, p);
  return total;
}

Maid convert_decision_to_chance(const Maid& maid, std::string_view d) {
  const NodeIndex target = maid.index_of(d);
  if (!maid.is_decision(target)) {
    throw MaidError("'" + std::string(d) + "' is not a decision node");
  }
  std::vector<Node> nodes(maid.nodes().begin(), maid.nodes().end());
  Node& n = nodes[target];
  n.kind = NodeKind::Chance;
  n.owner.clear();
  n.parents.clear();
  n.table.reset();
  n.synthetic_params = false;
  const double p = 1.0 / static_cast<double>(n.domain.size());
  n.cpt = std::vector<double>(n.domain.size(), p);
  return Maid(maid.agents(), std::move(nodes));
}

Maid remove_edge(const Maid& maid, std::string_view from, std::string_view to) {
  maid.index_of(from);
  const NodeIndex target = maid.index_of(to);
  std::vector<Node> nodes(maid.nodes().begin(), maid.nodes().end());
  Node& n = nodes[target];
  auto pos = std::find(n.parents.begin(), n.parents.end(), from);
  if (pos == n.parents.end()) {
    throw MaidError("edge " + std::string(from) + " -> " + std::string(to) +
                    " does not exist");
  }
  const std::size_t removed = static_cast<std::size_t>(pos - n.parents.begin());

  if (n.cpt || n.table) {
    auto radices = parent_radices(maid, maid.node(target));
    const std::size_t width = n.cpt ? n.domain.size() : 1;
    std::vector<double>& params = n.cpt ? *n.cpt : *n.table;
    if (!radices || params.size() != product(*radices) * width || width == 0) {
      n.cpt.reset();
      n.table.reset();
    } else {
      // Row index is mixed radix with the last parent fastest; split it into
      // (outer, removed value, inner) and average over the removed axis.
      std::size_t inner = 1;
      for (std::size_t i = removed + 1; i < radices->size(); ++i) {
        inner *= (*radices)[i];
      }
      const std::size_t axis = (*radices)[removed];
      const std::size_t outer = product(*radices) / (inner * axis);
      std::vector<double> reduced(outer * inner * width, 0.0);
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t a = 0; a < axis; ++a) {
          for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t old_row = (o * axis + a) * inner + i;
            const std::size_t new_row = o * inner + i;
            for (std::size_t k = 0; k < width; ++k) {
              reduced[new_row * width + k] +=
                  params[old_row * width + k] / static_cast<double>(axis);
            }
          }
        }
      }
      params = std::move(reduced);
    }
    n.synthetic_params = true;
  }
  n.parents.erase(pos);
  return Maid(maid.agents(), std::move(nodes));
}

EffectivenessMap all_effective(const Maid& maid) {
  EffectivenessMap flags;
  for (NodeIndex d : maid.decisions()) flags[maid.node(d).id] = true;
  return flags;
}

std::vector<char> effectiveness_mask(const Maid& maid,
                                     const EffectivenessMap& flags) {
  std::vector<char> mask(maid.size(), 0);
  for (NodeIndex i = 0; i < maid.size(); ++i) {
    if (!maid.is_decision(i)) continue;
    auto it = flags.find(maid.node(i).id);
    mask[i] = it == flags.end() ? 1 : static_cast<char>(it->second);
  }
  return mask;
}

}  // namespace maidkit
