#include "maidkit/simplify.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace maidkit {

namespace {

template <typename T>
void maybe_shuffle(std::vector<T>& items, std::optional<std::mt19937_64>& rng) {
  if (rng) std::shuffle(items.begin(), items.end(), *rng);
}

// The salt separates the two phases and successive graph states while
// keeping a seeded run reproducible.
std::optional<std::mt19937_64> make_rng(const SimplifyOptions& options,
                                        const Maid& maid, std::uint64_t phase) {
  if (!options.order_seed) return std::nullopt;
  std::seed_seq seq{*options.order_seed, phase, std::uint64_t{maid.edge_count()},
                    std::uint64_t{maid.decisions().size()}};
  return std::mt19937_64(seq);
}

}  // namespace

std::vector<NodeId> SimplificationTrace::eliminated() const {
  std::vector<NodeId> out;
  for (const auto& it : iterations) {
    out.insert(out.end(), it.eliminated.begin(), it.eliminated.end());
  }
  return out;
}

std::vector<Edge> SimplificationTrace::removed_edges() const {
  std::vector<Edge> out;
  for (const auto& it : iterations) {
    out.insert(out.end(), it.conversion_edges.begin(), it.conversion_edges.end());
    out.insert(out.end(), it.pruned_edges.begin(), it.pruned_edges.end());
  }
  return out;
}

IdentificationResult identification_phase(const Maid& maid,
                                          EffectivenessMap effectiveness,
                                          BlockCache& cache,
                                          const SimplifyOptions& options) {
  IdentificationResult result{maid, std::move(effectiveness), false, {}, {}};
  auto rng = make_rng(options, result.maid, 1);
  DetectorOptions detector_options;
  detector_options.mode = WitnessMode::FirstWitness;
  detector_options.reveal_deny_blocking = options.reveal_deny_blocking;
  detector_options.cache = &cache;

  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<NodeId> order;
    for (NodeIndex d : result.maid.decisions()) {
      const NodeId& id = result.maid.node(d).id;
      auto flag = result.effectiveness.find(id);
      if (flag == result.effectiveness.end() || flag->second) order.push_back(id);
    }
    maybe_shuffle(order, rng);
    for (const NodeId& d : order) {
      auto found = detect_patterns(result.maid, d, result.effectiveness,
                                   detector_options, /*short_circuit=*/true);
      if (!found.empty()) continue;
      result.effectiveness[d] = false;
      for (const NodeId& p : result.maid.node(d).parents) {
        result.conversion_edges.push_back({p, d});
      }
      result.maid = convert_decision_to_chance(result.maid, d);
      cache.invalidate();
      result.eliminated.push_back(d);
      result.changed = true;
      changed = true;
    }
  }
  return result;
}

RetractionResult retract_edges(const Maid& maid, const SimplifyOptions& options) {
  const std::size_t n = maid.size();
  std::vector<char> enabled(n * n, 0);
  for (NodeIndex v = 0; v < n; ++v) {
    for (NodeIndex p : maid.parents(v)) enabled[p * n + v] = 1;
  }

  struct Informational {
    NodeIndex from;
    NodeIndex to;
  };
  std::vector<Informational> candidates;
  for (NodeIndex d : maid.decisions()) {
    for (NodeIndex p : maid.parents(d)) {
      enabled[p * n + d] = 0;
      candidates.push_back({p, d});
    }
  }
  auto rng = make_rng(options, maid, 2);
  maybe_shuffle(candidates, rng);

  std::vector<char> in_w(n, 0);
  bool change = true;
  while (change) {
    change = false;
    for (const auto& [p, d] : candidates) {
      if (enabled[p * n + d]) continue;
      std::fill(in_w.begin(), in_w.end(), 0);
      in_w[d] = 1;
      for (NodeIndex q : maid.parents(d)) {
        if (q != p) in_w[q] = 1;
      }
      for (NodeIndex u : maid.utilities_of(maid.node(d).owner)) {
        if (!d_separated(maid, p, u, in_w, enabled)) {
          enabled[p * n + d] = 1;
          change = true;
          break;
        }
      }
    }
  }

  RetractionResult result{maid, false, {}};
  for (const auto& [p, d] : candidates) {
    if (!enabled[p * n + d]) {
      result.removed_edges.push_back({maid.node(p).id, maid.node(d).id});
    }
  }
  std::sort(result.removed_edges.begin(), result.removed_edges.end());
  for (const Edge& e : result.removed_edges) {
    result.maid = remove_edge(result.maid, e.from, e.to);
  }
  result.removed = !result.removed_edges.empty();
  return result;
}

SimplificationResult simplify(const Maid& maid, const SimplifyOptions& options) {
  if (auto diags = validate(maid); !diags.empty()) {
    throw MaidError("invalid diagram: " + diags.front().message);
  }
  SimplificationResult result{maid, {}, all_effective(maid), 0};
  BlockCache cache(options.memoize);
  const std::size_t bound = maid.edge_count() + 2;

  while (true) {
    if (result.iterations_count == bound) {
      throw std::logic_error("simplification did not converge within |E|+2 iterations");
    }
    ++result.iterations_count;
    IterationRecord record;

    auto ident =
        identification_phase(result.final, std::move(result.effectiveness), cache,
                             options);
    result.effectiveness = std::move(ident.effectiveness);
    record.eliminated = std::move(ident.eliminated);
    record.conversion_edges = std::move(ident.conversion_edges);
    std::sort(record.eliminated.begin(), record.eliminated.end());
    std::sort(record.conversion_edges.begin(), record.conversion_edges.end());

    auto retract = retract_edges(ident.maid, options);
    if (retract.removed) cache.invalidate();
    record.pruned_edges = std::move(retract.removed_edges);
    result.final = std::move(retract.maid);

    const bool changed = ident.changed || retract.removed;
    result.trace.iterations.push_back(std::move(record));
    if (!changed) break;
  }
  return result;
}

}  // namespace maidkit
