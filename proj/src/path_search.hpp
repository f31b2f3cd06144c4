#pragma once

// Index-level path search shared by the analysis and pattern modules.

#include <optional>
#include <span>
#include <vector>

#include "maidkit/analysis.hpp"

namespace maidkit::detail {

struct IndexQuery {
  NodeIndex source = 0;
  NodeIndex target = 0;
  EdgeMode edge_mode = EdgeMode::Undirected;
  FirstEdge first_edge = FirstEdge::Any;
  InteriorDecisions interior = InteriorDecisions::RequireEffective;
  std::vector<char> avoid;          // empty: nothing avoided
  std::vector<char> in_w;           // empty: no blocking set
  std::vector<NodeIndex> w_sorted;  // same set as in_w
  ColliderPolicy collider_policy = ColliderPolicy::Standard;
  bool require_collider = false;

  void set_blocking(std::size_t size, std::vector<NodeIndex> w);
};

struct IndexPath {
  std::vector<NodeIndex> nodes;
  std::vector<Step> steps;
};

/// `effective` is the mask from `effectiveness_mask`.
std::optional<IndexPath> search(const Maid& maid, const IndexQuery& q,
                                std::span<const char> effective,
                                BlockCache* cache);

bool satisfies(const Maid& maid, const IndexQuery& q,
               std::span<const char> effective, const IndexPath& path);

Path to_path(const Maid& maid, const IndexPath& path);

/// Collider-blocking test without memoization.
bool collider_blocked_uncached(const Maid& maid, NodeIndex b,
                               std::span<const NodeIndex> w_sorted);

}  // namespace maidkit::detail
