#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "maidkit/analysis.hpp"
#include "maidkit/core.hpp"
#include "maidkit/patterns.hpp"

namespace maidkit {

struct SimplifyOptions {
  /// When set, decisions and informational edges are visited in an order
  /// shuffled with this seed instead of id order. The result must not change.
  std::optional<std::uint64_t> order_seed;
  bool memoize = true;
  RevealDenyBlocking reveal_deny_blocking = RevealDenyBlocking::AllParents;
};

/// What one outer iteration did. Lists are sorted by id.
struct IterationRecord {
  std::vector<NodeId> eliminated;
  std::vector<Edge> conversion_edges;  // incoming edges of eliminated decisions
  std::vector<Edge> pruned_edges;
};

struct SimplificationTrace {
  std::vector<IterationRecord> iterations;

  std::vector<NodeId> eliminated() const;
  /// Conversion edges and pruned edges, in the order they were removed.
  std::vector<Edge> removed_edges() const;
};

struct SimplificationResult {
  Maid final;
  SimplificationTrace trace;
  // Keyed by every decision of the input; eliminated decisions map to false.
  EffectivenessMap effectiveness;
  std::size_t iterations_count = 0;
};

struct IdentificationResult {
  Maid maid;
  EffectivenessMap effectiveness;
  bool changed = false;
  std::vector<NodeId> eliminated;      // in elimination order
  std::vector<Edge> conversion_edges;  // in removal order
};

/// Repeatedly converts decisions without any reasoning pattern into uniform
/// chance nodes until a full pass changes nothing.
IdentificationResult identification_phase(const Maid& maid,
                                          EffectivenessMap effectiveness,
                                          BlockCache& cache,
                                          const SimplifyOptions& options = {});

struct RetractionResult {
  Maid maid;
  bool removed = false;
  std::vector<Edge> removed_edges;  // sorted
};

/// Removes every informational edge (p, d) whose source is d-separated from
/// all utilities of d's owner given d and d's other parents, computed over
/// the edges that survive.
RetractionResult retract_edges(const Maid& maid, const SimplifyOptions& options = {});

/// Alternates identification and pruning until an iteration changes nothing.
/// Throws MaidError on an invalid diagram.
SimplificationResult simplify(const Maid& maid, const SimplifyOptions& options = {});

}  // namespace maidkit
