#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "maidkit/core.hpp"

namespace maidkit {

enum class EdgeMode { DirectedOnly, Undirected };
enum class FirstEdge { Any, IntoSource, OutOfSource };
enum class InteriorDecisions { ForbidAll, RequireEffective };
enum class ColliderPolicy { Standard, CollidersOpen };

/// Constraints on a simple path between two distinct nodes. Blocking and
/// node restrictions apply to interior nodes only; endpoints never block.
struct PathQuery {
  NodeId source;
  NodeId target;
  EdgeMode edge_mode = EdgeMode::Undirected;
  FirstEdge first_edge = FirstEdge::Any;
  InteriorDecisions interior_decisions = InteriorDecisions::RequireEffective;
  std::set<NodeId> avoid;
  std::set<NodeId> blocking_set;
  ColliderPolicy collider_policy = ColliderPolicy::Standard;
  bool require_collider = false;
};

enum class Step { Forward, Backward };

/// `steps[i]` is the orientation of the edge between `nodes[i]` and
/// `nodes[i + 1]`: Forward means `nodes[i] -> nodes[i + 1]`.
struct Path {
  std::vector<NodeId> nodes;
  std::vector<Step> steps;

  bool operator==(const Path&) const = default;
};

/// Edge mask for d-separation queries; every edge is enabled unless
/// explicitly disabled.
class EdgeMask {
 public:
  void disable(NodeId from, NodeId to);
  void enable(const NodeId& from, const NodeId& to);
  bool enabled(const NodeId& from, const NodeId& to) const;
  const std::set<std::pair<NodeId, NodeId>>& disabled() const { return disabled_; }

 private:
  std::set<std::pair<NodeId, NodeId>> disabled_;
};

/// Memo table for blocked(b, W): is a collider at `b` blocked by W, i.e. is
/// neither `b` nor any of its descendants in W.
///
/// The cache binds itself to the revision of the graph it was filled from
/// and drops every entry when queried against a different revision. Not
/// thread-safe: each analysis session owns one.
class BlockCache {
 public:
  explicit BlockCache(bool enabled = true) : enabled_(enabled) {}

  /// `w` must be sorted and unique.
  bool blocked(const Maid& maid, NodeIndex b, std::span<const NodeIndex> w);
  void invalidate();

  bool enabled() const { return enabled_; }
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }
  std::uint64_t generation() const { return generation_; }
  std::size_t size() const { return entries_.size(); }

 private:
  struct Key {
    NodeIndex collider;
    std::vector<NodeIndex> w;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& key) const;
  };

  bool enabled_;
  std::unordered_map<Key, bool, KeyHash> entries_;
  std::optional<std::uint64_t> bound_revision_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
  std::uint64_t generation_ = 0;
};

/// Bayes-Ball d-separation of `x` and `y` given `w`, traversing only edges
/// enabled in `mask`. Collider descendants are computed over the same mask.
bool d_separated(const Maid& maid, std::string_view x, std::string_view y,
                 const std::set<NodeId>& w, const EdgeMask& mask = {});

/// Index-level variant. `enabled_edges` is a dense `size() * size()` matrix
/// indexed `from * size() + to`; empty means every edge is enabled.
bool d_separated(const Maid& maid, NodeIndex x, NodeIndex y,
                 std::span<const char> in_w, std::span<const char> enabled_edges);

/// Searches for a simple path satisfying every constraint of `q`.
std::optional<Path> find_path(const Maid& maid, const PathQuery& q,
                              const EffectivenessMap& effectiveness,
                              BlockCache* cache = nullptr);

/// Re-checks a candidate path against `q` (adjacency, simplicity, interior
/// restrictions, blocking, collider requirement).
bool path_satisfies(const Maid& maid, const PathQuery& q,
                    const EffectivenessMap& effectiveness, const Path& path);

// The seven path primitives. Each returns the witness path when one exists.

std::optional<Path> directed_decision_free_path(const Maid& maid,
                                                std::string_view x,
                                                std::string_view y);

std::optional<Path> directed_effective_path(const Maid& maid, std::string_view x,
                                            std::string_view y,
                                            const EffectivenessMap& effectiveness);

std::optional<Path> directed_effective_path_avoiding(
    const Maid& maid, std::string_view x, std::string_view y,
    const std::set<NodeId>& avoid, const EffectivenessMap& effectiveness);

std::optional<Path> back_door_path(const Maid& maid, std::string_view x,
                                   std::string_view y, const std::set<NodeId>& w,
                                   const EffectivenessMap& effectiveness,
                                   BlockCache* cache = nullptr);

std::optional<Path> front_door_indirect_path(
    const Maid& maid, std::string_view x, std::string_view y,
    const std::set<NodeId>& w, const EffectivenessMap& effectiveness,
    BlockCache* cache = nullptr);

std::optional<Path> effective_path(const Maid& maid, std::string_view x,
                                   std::string_view y, const std::set<NodeId>& w,
                                   const EffectivenessMap& effectiveness,
                                   BlockCache* cache = nullptr);

/// True iff `b` is not in `w` and no descendant of `b` is. Memoized in
/// `cache` under (b, sorted w).
bool collider_blocked(const Maid& maid, std::string_view b,
                      const std::set<NodeId>& w, BlockCache& cache);

/// Drops every memoized entry and advances the generation.
void invalidate_cache(BlockCache& cache);

}  // namespace maidkit
