#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace maidkit {

using NodeId = std::string;
using AgentId = std::string;
using NodeIndex = std::size_t;

/// Base class of every error raised by the library.
class MaidError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownNodeError : public MaidError {
 public:
  explicit UnknownNodeError(std::string_view id);
};

enum class NodeKind { Chance, Decision, Utility };

std::string_view to_string(NodeKind kind);

/// A node of a multi-agent influence diagram.
///
/// Parameters are optional. When present they are stored flat, with parent
/// configurations enumerated in mixed radix with the last listed parent
/// varying fastest. A chance CPT holds one row of `domain.size()` entries per
/// parent configuration; a utility table holds one value per configuration.
struct Node {
  NodeId id;
  NodeKind kind = NodeKind::Chance;
  AgentId owner;                    // decision and utility nodes only
  std::vector<std::string> domain;  // chance and decision nodes only
  std::vector<NodeId> parents;
  std::optional<std::vector<double>> cpt;
  std::optional<std::vector<double>> table;
  // Set when parameters were derived by marginalising out a removed parent.
  bool synthetic_params = false;

  bool operator==(const Node&) const = default;
};

struct Edge {
  NodeId from;
  NodeId to;

  auto operator<=>(const Edge&) const = default;
};

/// An immutable influence diagram. Nodes are stored sorted by id, which is
/// also the iteration order used by every algorithm in the library.
///
/// A Maid may be structurally invalid (cycles, dangling parents, ...);
/// `validate` reports such problems. Unresolved parent references are kept
/// in `Node::parents` but omitted from the index-based adjacency.
class Maid {
 public:
  Maid();
  /// Throws MaidError on an empty or duplicate node id.
  Maid(std::set<AgentId> agents, std::vector<Node> nodes);

  const std::set<AgentId>& agents() const { return agents_; }
  std::size_t size() const { return nodes_.size(); }
  std::span<const Node> nodes() const { return nodes_; }

  const Node& node(NodeIndex index) const { return nodes_[index]; }
  const Node& node(std::string_view id) const { return nodes_[index_of(id)]; }
  std::optional<NodeIndex> find(std::string_view id) const;
  NodeIndex index_of(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id).has_value(); }

  std::span<const NodeIndex> parents(NodeIndex index) const {
    return parent_index_[index];
  }
  std::span<const NodeIndex> children(NodeIndex index) const {
    return child_index_[index];
  }
  bool has_edge(NodeIndex from, NodeIndex to) const;

  NodeKind kind(NodeIndex index) const { return nodes_[index].kind; }
  bool is_decision(NodeIndex index) const {
    return nodes_[index].kind == NodeKind::Decision;
  }

  /// Empty when the resolved graph has a cycle.
  std::optional<std::vector<NodeIndex>> topological_order() const;

  std::vector<NodeIndex> decisions() const;
  std::vector<NodeIndex> utilities_of(std::string_view agent) const;
  std::vector<Edge> edges() const;
  std::size_t edge_count() const;

  /// Unique per structurally distinct value; copies share it.
  std::uint64_t revision() const { return revision_; }

  /// True when every chance node has a CPT and every utility a table.
  bool fully_parameterized() const;

 private:
  std::set<AgentId> agents_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, NodeIndex> lookup_;
  std::vector<std::vector<NodeIndex>> parent_index_;
  std::vector<std::vector<NodeIndex>> child_index_;
  std::uint64_t revision_;
};

/// Fluent construction helper used by fixtures and tests.
class MaidBuilder {
 public:
  MaidBuilder& agent(AgentId name);
  MaidBuilder& chance(NodeId id, std::vector<std::string> domain,
                      std::vector<NodeId> parents = {},
                      std::optional<std::vector<double>> cpt = std::nullopt);
  MaidBuilder& decision(NodeId id, AgentId owner,
                        std::vector<std::string> domain,
                        std::vector<NodeId> parents = {});
  MaidBuilder& utility(NodeId id, AgentId owner, std::vector<NodeId> parents,
                       std::optional<std::vector<double>> table = std::nullopt);
  MaidBuilder& node(Node node);
  Maid build() const;

 private:
  std::set<AgentId> agents_;
  std::vector<Node> nodes_;
};

struct Diagnostic {
  NodeId node;       // empty for graph-level problems
  std::string rule;  // stable machine-readable rule name
  std::string message;
};

/// Empty iff the diagram is structurally and numerically well formed.
std::vector<Diagnostic> validate(const Maid& maid);

/// Reflexive-transitive closure of the child relation (contains `x`).
std::set<NodeId> descendants(const Maid& maid, std::string_view x);
/// Strict ancestors of `x` (does not contain `x`).
std::set<NodeId> ancestors(const Maid& maid, std::string_view x);

/// Membership mask of the reflexive descendants of `x`.
std::vector<char> descendant_mask(const Maid& maid, NodeIndex x);

/// Number of joint configurations of the resolved parents of `index`.
std::size_t configuration_count(const Maid& maid, NodeIndex index);

/// Turns decision `d` into a parentless chance node with a uniform CPT.
Maid convert_decision_to_chance(const Maid& maid, std::string_view d);

/// Removes edge `from -> to`. Parameters of `to`, if any, are averaged over
/// the removed parent and flagged synthetic.
Maid remove_edge(const Maid& maid, std::string_view from, std::string_view to);

/// Decision id -> "may participate in a reasoning pattern".
using EffectivenessMap = std::map<NodeId, bool>;

/// Every current decision flagged effective.
EffectivenessMap all_effective(const Maid& maid);

/// Per-index view of `flags`; decisions missing from the map count as
/// effective, non-decisions are always false.
std::vector<char> effectiveness_mask(const Maid& maid,
                                     const EffectivenessMap& flags);

}  // namespace maidkit
